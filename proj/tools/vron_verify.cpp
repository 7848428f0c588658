// Consumer verifier: checks bundle certificates, signatures, attestation,
// allowlists, and provenance consistency; exits 0 only on a passing verdict.

#include "tool_common.hpp"

#include <unistd.h>

using namespace vron;

int main(int argc, char** argv) {
  CLI::App app{"vron-verify: verify final bundles against a policy"};
  std::vector<std::string> bundle_paths;
  std::string policy_path;
  std::string report_format = "text";
  app.add_option("--bundle", bundle_paths, "bundle file (.vbun); repeatable")->required();
  app.add_option("--policy", policy_path, "policy JSON from vron-authority")->required();
  app.add_option("--report", report_format, "text|machine");
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    VerifierPolicy policy = load_policy(policy_path);
    std::vector<FinalBundle> bundles;
    for (const auto& p : bundle_paths) bundles.push_back(decode_bundle_file(read_file(p)));

    VerificationReport report = bundles.size() == 1 ? verify_bundle(bundles[0], policy)
                                                    : verify_video(bundles, policy);
    if (report_format == "machine") {
      Bytes out = report.to_machine();
      if (::write(STDOUT_FILENO, out.data(), out.size()) != static_cast<ssize_t>(out.size()))
        fail(ErrorCode::IoError, "short write to stdout");
    } else if (report_format == "text") {
      std::fputs(report.to_text().c_str(), stdout);
    } else {
      fail(ErrorCode::BadParameters, "bad --report (text|machine)");
    }
    return report.verdict() ? 0 : 1;
  });
}
