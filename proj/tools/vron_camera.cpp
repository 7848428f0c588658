// Camera simulator: records synthetic footage (or ingests a VRONC file),
// splits it into segments, runs two-report attestation, and writes signed
// segment files.

#include "tool_common.hpp"

#include <filesystem>

using namespace vron;

int main(int argc, char** argv) {
  CLI::App app{"vron-camera: produce signed video segments"};
  std::string input = "synthetic";
  std::uint32_t frames = 334;
  std::uint32_t width = 176, height = 144;
  std::string fps_str = "30/1";
  std::uint32_t segment_size = 60;
  std::string out_dir = ".";
  std::string device_state_str = "genuine";
  std::string authority_key;
  std::string audio_path;
  std::uint64_t timestamp = 0;

  app.add_option("--input", input, "'synthetic' or a VRONC raw container file");
  app.add_option("--frames", frames, "synthetic frame count");
  app.add_option("--width", width, "synthetic frame width");
  app.add_option("--height", height, "synthetic frame height");
  app.add_option("--fps", fps_str, "frame rate NUM/DEN");
  app.add_option("--segment-size", segment_size, "frames per segment")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "output directory for .vseg files");
  app.add_option("--device-state", device_state_str,
                 "genuine|rooted|unlocked_bootloader|custom_os");
  app.add_option("--authority-key", authority_key, "attestation authority keypair file")
      ->required();
  app.add_option("--audio", audio_path, "opaque audio blob attached to every segment");
  app.add_option("--timestamp", timestamp, "capture time override (seconds since epoch)");
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    Authority authority = vtool::load_authority(authority_key);
    auto device_state = device_state_from_name(device_state_str);
    if (!device_state) fail(ErrorCode::BadParameters, "bad --device-state");
    FrameRate fps = vtool::parse_fps(fps_str);

    std::vector<RawFrame> footage;
    if (input == "synthetic")
      footage = synthetic_frames(frames, width, height);
    else
      footage = load_frames_from_file(input);
    if (footage.empty()) fail(ErrorCode::EmptySegment, "no input frames");

    Bytes audio;
    if (!audio_path.empty()) audio = read_file(audio_path);
    if (timestamp == 0) timestamp = system_clock_seconds()();

    std::filesystem::create_directories(out_dir);
    const std::uint32_t total_segments =
        static_cast<std::uint32_t>((footage.size() + segment_size - 1) / segment_size);

    RecordingSession session = begin_recording(authority, *device_state);
    std::vector<std::string> written;
    for (std::uint32_t s = 0; s < total_segments; ++s) {
      std::size_t beg = static_cast<std::size_t>(s) * segment_size;
      std::size_t end = std::min(footage.size(), beg + segment_size);
      std::vector<RawFrame> slice(footage.begin() + beg, footage.begin() + end);
      SignedSegment seg =
          session.capture_segment(slice, s, total_segments, fps, timestamp + s, audio);
      char name[64];
      std::snprintf(name, sizeof name, "segment_%04u.vseg", s);
      std::string path = (std::filesystem::path(out_dir) / name).string();
      write_file(path, encode_segment_file(seg));
      written.push_back(path);
    }
    session.finish_recording();

    std::printf("video id: %s\n", hex(session.video_id()).c_str());
    for (const auto& p : written) std::printf("wrote %s\n", p.c_str());
    return 0;
  });
}
