// Standalone decoder worker for direct stage-to-stage wiring: reads a signed
// segment (file or upload socket), streams frame messages to the next stage,
// and sends the sidecar straight to the encoder's sidecar port.

#include "tool_common.hpp"

using namespace vron;

int main(int argc, char** argv) {
  CLI::App app{"vron-decoder: fixed-function decode stage (TCP)"};
  std::string input;
  std::uint16_t listen_port = 0;
  std::string next_addr;
  std::string sidecar_host = "127.0.0.1";
  std::uint16_t sidecar_port = 0;
  std::string authority_key, key_out;
  app.add_option("--input", input, "signed segment file (.vseg)");
  app.add_option("--listen", listen_port, "accept one segment upload on this port instead");
  app.add_option("--next", next_addr, "host:port of the first filter (or the encoder)")
      ->required();
  app.add_option("--encoder-sidecar-host", sidecar_host, "encoder host for the sidecar");
  app.add_option("--encoder-sidecar-port", sidecar_port, "encoder sidecar port")->required();
  app.add_option("--authority-key", authority_key, "attestation authority keypair file")
      ->required();
  app.add_option("--key-out", key_out, "write this stage's certificate here");
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    Authority authority = vtool::load_authority(authority_key);
    TrustRoots trust = standard_trust_roots(authority.public_key());
    StageWorker worker = make_worker(authority, StageRole::Decoder, decoder_measurement(),
                                     random_seed_source(), 1);
    if (!key_out.empty()) write_file(key_out, encode_certificate_file(worker.cert));

    auto colon = next_addr.rfind(':');
    if (colon == std::string::npos) fail(ErrorCode::BadParameters, "--next must be host:port");
    std::string next_host = next_addr.substr(0, colon);
    std::uint16_t next_port = static_cast<std::uint16_t>(std::stoul(next_addr.substr(colon + 1)));

    // Input stream: one segment object, from a file or a single upload.
    StreamReader in = [&]() -> StreamReader {
      if (!input.empty()) {
        auto state = std::make_shared<std::pair<Bytes, bool>>();
        SignedSegment seg = decode_segment_file(read_file(input));
        for (auto& framed : frame_object(MsgType::Segment, encode_signed_segment(seg)))
          append(state->first, framed);
        return StreamReader([state]() -> std::optional<Bytes> {
          if (state->second) return std::nullopt;
          state->second = true;
          return state->first;
        });
      }
      if (listen_port == 0) fail(ErrorCode::BadParameters, "need --input or --listen");
      auto listener = std::make_shared<TcpListener>(listen_port);
      std::fprintf(stderr, "listening for a segment on port %u\n", listener->port());
      auto sock = std::make_shared<TcpSocket>(listener->accept());
      return StreamReader([listener, sock]() { return sock->read_some(); });
    }();

    auto next_sock = std::make_shared<TcpSocket>(TcpSocket::connect_to(next_host, next_port));
    auto side_sock =
        std::make_shared<TcpSocket>(TcpSocket::connect_to(sidecar_host, sidecar_port));

    // Frames and the certificate chain go to the next stage; the sidecar
    // goes straight to the encoder; errors go to both paths.
    ByteSink out{[next_sock, side_sock](const Bytes& framed) {
                   MsgType t = framed.size() >= 5 ? static_cast<MsgType>(framed[4])
                                                  : MsgType::Error;
                   if (t == MsgType::Sidecar) return side_sock->write_all(framed);
                   if (t == MsgType::Error) {
                     side_sock->write_all(framed);
                     return next_sock->write_all(framed);
                   }
                   return next_sock->write_all(framed);
                 },
                 [next_sock, side_sock] {
                   next_sock->shutdown_write();
                   side_sock->shutdown_write();
                 }};

    serve_decoder(std::move(in), out, trust, std::move(worker));
    return 0;
  });
}
