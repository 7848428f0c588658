// Post-processing job runner: wires decoder → filters → encoder over the
// chosen transport and writes the final bundle.

#include "tool_common.hpp"

#include <chrono>
#include <fstream>

using namespace vron;

int main(int argc, char** argv) {
  CLI::App app{"vron-run: post-process a signed segment through the stage pipeline"};
  std::string input, output;
  std::vector<std::string> filter_args;
  std::string transport_str = "local";
  std::size_t pool_size = 0;
  std::string bench_csv;
  std::string authority_key;

  app.add_option("--input", input, "signed segment file (.vseg)")->required();
  app.add_option("--out", output, "output bundle file (.vbun)")->required();
  app.add_option("--filter", filter_args,
                 "filter name[:param[,param]]; repeatable, order = application order");
  app.add_option("--transport", transport_str, "local|tcp");
  app.add_option("--pool-size", pool_size, "decoder pool capacity (0 = no pool)");
  app.add_option("--bench-csv", bench_csv, "append a phase-timing CSV row to this file");
  app.add_option("--authority-key", authority_key, "attestation authority keypair file")
      ->required();
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    Authority authority = vtool::load_authority(authority_key);
    TrustRoots trust = standard_trust_roots(authority.public_key());

    JobSpec spec;
    for (const auto& arg : filter_args) spec.filter_chain.push_back(parse_filter_spec(arg));
    spec.input_path = input;
    spec.output_path = output;
    if (transport_str == "local")
      spec.transport = Transport::InProcess;
    else if (transport_str == "tcp")
      spec.transport = Transport::Tcp;
    else
      fail(ErrorCode::BadParameters, "bad --transport (local|tcp)");

    std::optional<DecoderPool> pool;
    RunOptions options;
    if (pool_size > 0) {
      pool.emplace(authority, random_seed_source(), pool_size);
      options.pool = &*pool;
    }

    using Clock = std::chrono::steady_clock;
    auto t0 = Clock::now();
    SignedSegment segment = decode_segment_file(read_file(spec.input_path));
    auto t1 = Clock::now();
    FinalBundle bundle =
        run_segment(segment, spec.filter_chain, trust, authority, spec.transport, options);
    auto t2 = Clock::now();
    write_file(spec.output_path, encode_bundle_file(bundle));
    auto t3 = Clock::now();

    auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
    if (!bench_csv.empty()) {
      bool fresh = !std::ifstream(bench_csv).good();
      std::ofstream csv(bench_csv, std::ios::app);
      if (!csv) fail(ErrorCode::IoError, "cannot write " + bench_csv);
      if (fresh) csv << bench_csv_header() << "\n";
      BenchResult row;
      row.design = Design::StagedSigned;
      row.width = segment.provenance.video.width;
      row.height = segment.provenance.video.height;
      row.frames = segment.provenance.segment.total_frames;
      row.chain = chain_label(spec.filter_chain);
      row.rep = 0;
      row.ingest_s = secs(t0, t1);
      row.process_s = secs(t1, t2);
      row.emit_s = secs(t2, t3);
      csv << to_csv_row(row) << "\n";
    }

    std::printf("bundle: %s\nvideo id: %s\nfilters: %s\nelapsed: %.3fs\n", output.c_str(),
                hex(bundle.provenance.video.video_id).c_str(),
                chain_label(spec.filter_chain).c_str(), secs(t0, t3));
    return 0;
  });
}
