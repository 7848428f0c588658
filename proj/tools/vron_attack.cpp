// Adversarial driver: mounts one attack cell against a self-contained honest
// pipeline (or a caller-provided bundle) and prints DETECTED or UNDETECTED.

#include "tool_common.hpp"

using namespace vron;

int main(int argc, char** argv) {
  CLI::App app{"vron-attack: mount a tamper attack and check it is defeated"};
  std::string kind_str;
  std::string boundary_str;
  std::uint64_t seed = 1;
  bool resign = false;
  bool list = false;
  std::string bundle_path, donor_path, policy_path, out_path;
  std::uint32_t frames = 8, width = 48, height = 32;
  std::string transport_str = "local";

  app.add_option("--kind", kind_str, "attack kind (see --list)");
  app.add_option("--boundary", boundary_str, "in-flight boundary (see --list)");
  app.add_option("--seed", seed, "attack randomness seed");
  app.add_flag("--resign", resign, "re-sign mutated bundles under attacker keys");
  app.add_flag("--list", list, "print the applicable attack matrix and exit");
  app.add_option("--bundle", bundle_path, "attack this bundle file instead of a synthetic run");
  app.add_option("--donor", donor_path, "donor bundle for substitution/origin attacks");
  app.add_option("--policy", policy_path, "policy for verifying --bundle attacks");
  app.add_option("--out", out_path, "write the tampered bundle here (with --bundle)");
  app.add_option("--frames", frames, "synthetic scenario frame count");
  app.add_option("--width", width, "synthetic scenario frame width");
  app.add_option("--height", height, "synthetic scenario frame height");
  app.add_option("--transport", transport_str, "local|tcp");
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    if (list) {
      std::printf("%-24s %s\n", "kind", "boundary");
      for (const auto& cell : attack_matrix())
        std::printf("%-24s %s\n", attack_name(cell.kind),
                    cell.boundary ? boundary_name(*cell.boundary) : "bundle/video");
      return 0;
    }

    auto kind = attack_from_name(kind_str);
    if (!kind) fail(ErrorCode::BadParameters, "unknown --kind: " + kind_str);

    // Bundle-file mode: tamper an existing bundle and verify it.
    if (!bundle_path.empty()) {
      if (policy_path.empty())
        fail(ErrorCode::BadParameters, "--bundle mode needs --policy");
      FinalBundle bundle = decode_bundle_file(read_file(bundle_path));
      TamperOptions topts;
      topts.resign = resign;
      FinalBundle donor;
      if (!donor_path.empty()) {
        donor = decode_bundle_file(read_file(donor_path));
        topts.donor = &donor;
      }
      FinalBundle tampered = tamper_bundle(bundle, *kind, seed, topts);
      if (!out_path.empty()) write_file(out_path, encode_bundle_file(tampered));
      VerificationReport report = verify_bundle(tampered, load_policy(policy_path));
      bool detected = !report.verdict();
      if (*kind == AttackKind::None) detected = report.verdict();
      std::fputs(report.to_text().c_str(), stdout);
      std::printf("%s\n", detected ? "DETECTED" : "UNDETECTED");
      return detected ? 0 : 1;
    }

    // Self-contained scenario mode.
    std::optional<Boundary> boundary;
    if (!boundary_str.empty()) {
      boundary = boundary_from_name(boundary_str);
      if (!boundary) fail(ErrorCode::BadParameters, "unknown --boundary: " + boundary_str);
    }
    AttackScenarioConfig cfg;
    cfg.seed = seed;
    cfg.resign = resign;
    cfg.frames = frames;
    cfg.width = width;
    cfg.height = height;
    cfg.transport = transport_str == "tcp" ? Transport::Tcp : Transport::InProcess;

    AttackScenarioResult result = run_attack_scenario(*kind, boundary, cfg);
    std::printf("%s\n", result.detail.c_str());
    // For kind=none, DETECTED means the honest control verified.
    bool ok = *kind == AttackKind::None ? result.honest_verified : result.detected;
    std::printf("%s\n", ok ? "DETECTED" : "UNDETECTED");
    return ok ? 0 : 1;
  });
}
