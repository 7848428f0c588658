#include "test_support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "vron/bench.hpp"
#include "vron/transport.hpp"

// End-to-end checks of the installed command-line surfaces, run as real
// subprocesses: authority → camera → run → verify, the attack driver, and
// the standalone decoder/filter/encoder trio wired over loopback TCP.

namespace fs = std::filesystem;
using namespace vron;

namespace {

std::string tool(const std::string& name) { return std::string(VRON_TOOLS_DIR) + "/" + name; }

struct CliEnv {
  fs::path dir;

  explicit CliEnv(const std::string& tag) {
    dir = fs::temp_directory_path() / ("vron-cli-" + tag + "-" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  int run(const std::string& cmd, const std::string& log_name = "cmd.log") const {
    std::string full = cmd + " >>" + path(log_name) + " 2>&1";
    int rc = std::system(full.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string log(const std::string& log_name = "cmd.log") const {
    std::ifstream in(path(log_name));
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
};

// The stage workers accept exactly one real connection, so readiness is
// polled via their "listening" log lines rather than probe connections.
bool wait_log_line(const CliEnv& env, const std::string& log_name, const std::string& needle,
                   int tries = 100) {
  for (int i = 0; i < tries; ++i) {
    if (env.log(log_name).find(needle) != std::string::npos) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  return false;
}

bool wait_file(const std::string& path, int tries = 200) {
  for (int i = 0; i < tries; ++i) {
    std::error_code ec;
    if (fs::exists(path, ec) && fs::file_size(path, ec) > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(150));
      return true;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  return false;
}

}  // namespace

TEST_CASE("authority -> camera -> run -> verify, both transports") {
  CliEnv env("e2e");
  REQUIRE(env.run(tool("vron-authority") + " --key-out " + env.path("auth.key") +
                  " --policy-out " + env.path("policy.json")) == 0);

  REQUIRE(env.run(tool("vron-camera") + " --input synthetic --frames 10 --width 64 --height 48" +
                  " --fps 30/1 --segment-size 5 --out-dir " + env.path("segs") +
                  " --device-state genuine --authority-key " + env.path("auth.key")) == 0);
  REQUIRE(fs::exists(env.path("segs") + "/segment_0000.vseg"));
  REQUIRE(fs::exists(env.path("segs") + "/segment_0001.vseg"));

  for (std::string transport : {"local", "tcp"}) {
    for (int s = 0; s < 2; ++s) {
      INFO("transport=" << transport << " segment=" << s);
      std::string seg = env.path("segs") + "/segment_000" + std::to_string(s) + ".vseg";
      std::string bun = env.path("bundle_" + transport + "_" + std::to_string(s) + ".vbun");
      REQUIRE(env.run(tool("vron-run") + " --input " + seg + " --out " + bun +
                      " --filter blur:7 --filter brightness:-0.2 --transport " + transport +
                      " --pool-size 2 --bench-csv " + env.path("run.csv") +
                      " --authority-key " + env.path("auth.key")) == 0);
    }
    int rc = env.run(tool("vron-verify") + " --bundle " +
                     env.path("bundle_" + transport + "_0.vbun") + " --bundle " +
                     env.path("bundle_" + transport + "_1.vbun") + " --policy " +
                     env.path("policy.json") + " --report text", "verify.log");
    INFO(env.log("verify.log"));
    CHECK(rc == 0);
  }

  SECTION("machine report format parses and matches") {
    std::string out = env.path("report.bin");
    int rc = std::system((tool("vron-verify") + " --bundle " + env.path("bundle_local_0.vbun") +
                          " --policy " + env.path("policy.json") + " --report machine > " + out)
                             .c_str());
    REQUIRE(WIFEXITED(rc));
    REQUIRE(WEXITSTATUS(rc) == 0);
    VerificationReport r = VerificationReport::from_machine(read_file(out));
    CHECK(r.verdict());
    CHECK(r.checks.size() == 7);
  }

  SECTION("tampered bundle file fails verification with exit 1") {
    Bytes bundle_file = read_file(env.path("bundle_local_0.vbun"));
    FinalBundle b = decode_bundle_file(bundle_file);
    b.provenance.segment.frame_rate = {15, 2};
    write_file(env.path("tampered.vbun"), encode_bundle_file(b));
    int rc = env.run(tool("vron-verify") + " --bundle " + env.path("tampered.vbun") +
                     " --policy " + env.path("policy.json"), "tampered.log");
    CHECK(rc == 1);
  }

  SECTION("bench csv rows accumulated") {
    std::ifstream csv(env.path("run.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header == bench_csv_header());
    int rows = 0;
    for (std::string line; std::getline(csv, line);) {
      if (line.empty()) continue;
      ++rows;
      CHECK(line.rfind("staged_signed,64,48,5,", 0) == 0);
    }
    // 2 transports x 2 segments per execution of the test body (sections
    // re-run the body, appending more groups of 4)
    CHECK(rows >= 4);
    CHECK(rows % 4 == 0);
  }
}

TEST_CASE("vron-attack scenario mode detects and controls verify") {
  CliEnv env("attack");
  CHECK(env.run(tool("vron-attack") + " --list", "list.log") == 0);
  CHECK(env.run(tool("vron-attack") + " --kind fps_change --seed 3", "a1.log") == 0);
  CHECK(env.run(tool("vron-attack") +
                " --kind frame_delete --boundary filter_to_encoder --seed 3", "a2.log") == 0);
  CHECK(env.run(tool("vron-attack") + " --kind none --seed 3", "a3.log") == 0);
  CHECK(env.log("a1.log").find("DETECTED") != std::string::npos);
  CHECK(env.log("a3.log").find("DETECTED") != std::string::npos);
}

TEST_CASE("standalone decoder/filter/encoder wire a pipeline over TCP") {
  CliEnv env("trio");
  REQUIRE(env.run(tool("vron-authority") + " --key-out " + env.path("auth.key") +
                  " --policy-out " + env.path("policy.json")) == 0);
  REQUIRE(env.run(tool("vron-camera") + " --input synthetic --frames 6 --width 48 --height 36" +
                  " --segment-size 6 --out-dir " + env.path("segs") + " --authority-key " +
                  env.path("auth.key")) == 0);

  std::uint16_t base = static_cast<std::uint16_t>(23000 + (::getpid() % 2000) * 3);
  std::uint16_t p_frames = base, p_sidecar = base + 1, p_filter = base + 2;
  std::string bundle = env.path("trio.vbun");

  std::string enc_cmd = tool("vron-encoder") + " --listen " + std::to_string(p_frames) +
                        " --encoder-sidecar-port " + std::to_string(p_sidecar) + " --out " +
                        bundle + " --authority-key " + env.path("auth.key") + " >>" +
                        env.path("enc.log") + " 2>&1 &";
  REQUIRE(std::system(enc_cmd.c_str()) == 0);
  REQUIRE(wait_log_line(env, "enc.log", "encoder listening"));

  std::string fil_cmd = tool("vron-filter") + " --listen " + std::to_string(p_filter) +
                        " --next 127.0.0.1:" + std::to_string(p_frames) +
                        " --filter blur --param 7 --authority-key " + env.path("auth.key") +
                        " >>" + env.path("fil.log") + " 2>&1 &";
  REQUIRE(std::system(fil_cmd.c_str()) == 0);
  REQUIRE(wait_log_line(env, "fil.log", "listening"));
  INFO(env.log("enc.log"));
  INFO(env.log("fil.log"));

  REQUIRE(env.run(tool("vron-decoder") + " --input " + env.path("segs") + "/segment_0000.vseg" +
                  " --next 127.0.0.1:" + std::to_string(p_filter) + " --encoder-sidecar-port " +
                  std::to_string(p_sidecar) + " --authority-key " + env.path("auth.key"),
                  "dec.log") == 0);

  REQUIRE(wait_file(bundle));
  int rc = env.run(tool("vron-verify") + " --bundle " + bundle + " --policy " +
                   env.path("policy.json"), "trio-verify.log");
  INFO(env.log("trio-verify.log"));
  CHECK(rc == 0);

  FinalBundle b = decode_bundle_file(read_file(bundle));
  REQUIRE(b.provenance.filters.size() == 1);
  CHECK(b.provenance.filters[0].name == "blur");
}
