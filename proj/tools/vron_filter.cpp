// Standalone filter worker: accepts the upstream stream on --listen, applies
// one fixed function, forwards to --next.

#include "tool_common.hpp"

using namespace vron;

int main(int argc, char** argv) {
  CLI::App app{"vron-filter: fixed-function filter stage (TCP)"};
  std::uint16_t listen_port = 0;
  std::string next_addr;
  std::string filter_name;
  std::vector<double> params;
  std::string authority_key, key_out;
  app.add_option("--listen", listen_port, "accept the upstream connection on this port")
      ->required();
  app.add_option("--next", next_addr, "host:port of the next stage")->required();
  app.add_option("--filter", filter_name, "blur|sharpen|brightness|grayscale|denoise|white_balance")
      ->required();
  app.add_option("--param", params, "filter parameter; repeatable");
  app.add_option("--authority-key", authority_key, "attestation authority keypair file")
      ->required();
  app.add_option("--key-out", key_out, "write this stage's certificate here");
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    Authority authority = vtool::load_authority(authority_key);
    TrustRoots trust = standard_trust_roots(authority.public_key());

    FilterSpec spec;
    spec.name = filter_name;
    for (double p : params) spec.parameters.push_back(fixed_from_double(p));
    validate_filter_spec(spec);

    StageWorker worker = make_worker(authority, StageRole::Filter,
                                     filter_measurement(spec.name), random_seed_source(), 1);
    if (!key_out.empty()) write_file(key_out, encode_certificate_file(worker.cert));

    auto colon = next_addr.rfind(':');
    if (colon == std::string::npos) fail(ErrorCode::BadParameters, "--next must be host:port");
    std::string next_host = next_addr.substr(0, colon);
    std::uint16_t next_port = static_cast<std::uint16_t>(std::stoul(next_addr.substr(colon + 1)));

    TcpListener listener(listen_port);
    std::fprintf(stderr, "filter %s listening on port %u\n", spec.name.c_str(),
                 listener.port());
    auto up = std::make_shared<TcpSocket>(listener.accept());
    auto down = std::make_shared<TcpSocket>(TcpSocket::connect_to(next_host, next_port));

    serve_filter(reader_from_socket(up), sink_from_socket(down), trust, spec,
                 std::move(worker));
    return 0;
  });
}
