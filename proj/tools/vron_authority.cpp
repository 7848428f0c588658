// Creates the simulated attestation authority: a keypair file for the
// camera/stage side and a verifier policy JSON approving the stock stages.

#include "tool_common.hpp"

using namespace vron;

int main(int argc, char** argv) {
  CLI::App app{"vron-authority: create the attestation authority key and default policy"};
  std::string key_out = "authority.key";
  std::string policy_out = "policy.json";
  app.add_option("--key-out", key_out, "authority keypair file (keep private)");
  app.add_option("--policy-out", policy_out, "verifier policy JSON (public)");
  CLI11_PARSE(app, argc, argv);

  return vtool::run_tool([&] {
    Authority authority = Authority::create();
    write_file(key_out, encode_key_file(authority.keys));
    save_policy(policy_out, standard_policy(authority.public_key()));
    std::printf("authority key: %s\npolicy: %s\nauthority public key: %s\n", key_out.c_str(),
                policy_out.c_str(), hex(authority.public_key()).c_str());
    return 0;
  });
}
