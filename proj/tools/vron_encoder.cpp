// Standalone encoder worker: accepts the frame stream on --listen and the
// decoder's sidecar on --encoder-sidecar-port, then writes the final bundle.

#include "tool_common.hpp"

#include <thread>

using namespace vron;

namespace {

// Feeds framed messages from one socket into a shared pipe, keeping all
// chunks of one object contiguous so two sources can interleave safely.
void pump_objects(std::shared_ptr<TcpSocket> sock, std::shared_ptr<BytePipe> pipe,
                  std::mutex& push_mu) {
  StreamReader in = reader_from_socket(sock);
  try {
    while (true) {
      auto first = wire_decode(in);
      if (!first) break;
      std::vector<Bytes> group;
      group.push_back(wire_encode(*first));
      ByteReader env(first->payload);
      env.u32();  // chunk index
      std::uint32_t count = env.u32();
      for (std::uint32_t i = 1; i < count && !env.failed(); ++i) {
        auto m = wire_decode(in);
        if (!m) fail(ErrorCode::Truncated, "stream ended mid-object");
        group.push_back(wire_encode(*m));
      }
      std::lock_guard<std::mutex> lk(push_mu);
      for (auto& g : group) pipe->push(std::move(g));
    }
  } catch (const Error& e) {
    std::lock_guard<std::mutex> lk(push_mu);
    for (auto& framed :
         frame_object(MsgType::Error, encode_error_payload(e.code(), e.what())))
      pipe->push(std::move(framed));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vron-encoder: fixed-function encode stage (TCP)"};
  std::uint16_t listen_port = 0;
  std::uint16_t sidecar_port = 0;
  std::string out_path;
  std::string authority_key, key_out;
  app.add_option("--listen", listen_port, "accept the frame stream on this port")->required();
  app.add_option("--encoder-sidecar-port", sidecar_port, "accept the sidecar on this port")
      ->required();
  app.add_option("--out", out_path, "output bundle file (.vbun)")->required();
  app.add_option("--authority-key", authority_key, "attestation authority keypair file")
      ->required();
  app.add_option("--key-out", key_out, "write this stage's certificate here");
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    Authority authority = vtool::load_authority(authority_key);
    TrustRoots trust = standard_trust_roots(authority.public_key());
    StageWorker worker = make_worker(authority, StageRole::Encoder, encoder_measurement(),
                                     random_seed_source(), 1);
    if (!key_out.empty()) write_file(key_out, encode_certificate_file(worker.cert));

    TcpListener frames_listener(listen_port);
    TcpListener sidecar_listener(sidecar_port);
    std::fprintf(stderr, "encoder listening: frames %u, sidecar %u\n", frames_listener.port(),
                 sidecar_listener.port());

    auto frames_sock = std::make_shared<TcpSocket>(frames_listener.accept());
    auto sidecar_sock = std::make_shared<TcpSocket>(sidecar_listener.accept());

    auto merged = std::make_shared<BytePipe>(64);
    std::mutex push_mu;
    std::thread t1([&] { pump_objects(frames_sock, merged, push_mu); });
    std::thread t2([&] { pump_objects(sidecar_sock, merged, push_mu); });
    std::thread closer([&] {
      t1.join();
      t2.join();
      merged->close();
    });

    // Collect the encoder's output (the bundle or an error) in memory.
    auto result = std::make_shared<std::vector<Bytes>>();
    ByteSink out{[result](const Bytes& framed) {
                   result->push_back(framed);
                   return true;
                 },
                 [] {}};
    serve_encoder(reader_from_pipe(merged), out, trust, std::move(worker));
    closer.join();

    // Decode what the encoder produced.
    auto state = std::make_shared<std::pair<std::vector<Bytes>, std::size_t>>(*result, 0);
    StreamReader rd([state]() -> std::optional<Bytes> {
      if (state->second >= state->first.size()) return std::nullopt;
      return state->first[state->second++];
    });
    ObjectAssembler assembler;
    while (auto m = wire_decode(rd)) {
      if (auto obj = assembler.feed(*m)) {
        if (obj->first == MsgType::Bundle) {
          write_file(out_path, wrap_section(SectionTag::FinalBundle, std::move(obj->second)));
          std::printf("bundle: %s\n", out_path.c_str());
          return 0;
        }
        if (obj->first == MsgType::Error) {
          auto [code, what] = decode_error_payload(obj->second);
          throw Error(code, what);
        }
      }
    }
    fail(ErrorCode::StageCrashed, "encoder produced no bundle");
  });
}
