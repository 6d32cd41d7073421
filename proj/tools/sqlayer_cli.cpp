// sqlayer: run, serve and inspect layered semi-quantum protocol simulations.
//
//   sqlayer run --rounds 100000 --seed 42 --protocol SQKD --out-dir out/
//   sqlayer run --protocol TLSQSC --message text:hello --eve bob1:fwd:comp
//   sqlayer serve --role bob1 --port 7001 --seed 42
//   sqlayer run --transport socket --bob1 127.0.0.1:7001 --bob2 127.0.0.1:7002 --seed 42
//   sqlayer oracle --eve bob1:fwd:comp
//
// Exit status: 0 completed, 2 aborted (eavesdropping detected), 1 error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqlayer/sqlayer.hpp"

namespace {

constexpr int kExitError = 1;

struct RunArgs {
  std::string config_file;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::string protocol;
  std::string eve;
  std::vector<std::string> loss, depol;
  double threshold = -1.0;
  std::string message;
  std::string transport;
  std::string bob1, bob2;
  std::string out_dir;
};

sqlayer::RunConfig build_config(const RunArgs& a, const CLI::App& run) {
  using namespace sqlayer;
  RunConfig c;
  if (!a.config_file.empty()) {
    std::ifstream f(a.config_file);
    if (!f) throw std::runtime_error("cannot read config " + a.config_file);
    c = RunConfig::from_json(ojson::parse(f));
  }
  if (run.count("--rounds")) c.n_rounds = a.rounds;
  if (run.count("--seed")) c.seed = a.seed;
  if (run.count("--protocol")) c.protocol = parse_protocol(a.protocol);
  if (run.count("--eve"))
    for (auto& ch : parse_eve_spec(a.eve)) c.channels.push_back(ch);
  for (const auto& s : a.loss)
    for (auto& ch : parse_noise_spec<channel_kind::Loss>(s)) c.channels.push_back(ch);
  for (const auto& s : a.depol)
    for (auto& ch : parse_noise_spec<channel_kind::Depolarize>(s)) c.channels.push_back(ch);
  if (run.count("--threshold")) c.abort_threshold = a.threshold;
  if (run.count("--message")) c.message = MessagePayload::parse(a.message);
  if (run.count("--transport")) {
    if (a.transport == "inprocess")
      c.transport = Transport::InProcess;
    else if (a.transport == "socket")
      c.transport = Transport::Socket;
    else
      throw std::invalid_argument("transport must be inprocess or socket");
  }
  if (run.count("--bob1")) c.bob1 = parse_endpoint(a.bob1);
  if (run.count("--bob2")) c.bob2 = parse_endpoint(a.bob2);
  if (run.count("--out-dir"))
    c.out_dir = a.out_dir;
  else if (c.out_dir.empty())
    if (const char* env = std::getenv("SQLAYER_OUT_DIR")) c.out_dir = env;
  c.validate();
  return c;
}

int do_run(const RunArgs& a, const CLI::App& run) {
  using namespace sqlayer;
  const RunConfig c = build_config(a, run);
  const RunOutcome out =
      c.transport == Transport::Socket ? connect_and_run(c) : run_in_process(c);
  if (!c.out_dir.empty()) write_artifacts(out, c, c.out_dir);
  std::cout << report_document(out, c).dump(2) << '\n';
  if (out.test.abort)
    std::cerr << (out.test.inconclusive ? "aborted: no check rounds\n"
                                        : "aborted: eavesdropping detected\n");
  return exit_status(out);
}

int do_serve(const std::string& role, const std::string& host, std::uint16_t port,
             std::uint64_t seed) {
  using namespace sqlayer;
  const Link link = parse_link(role);
  Listener listener({host, port});
  std::cerr << role << " listening on " << host << ':' << listener.port() << '\n';
  LineStream alice = listener.accept();
  const BobSession s = serve_participant(link, alice, seed);
  std::size_t measured = 0;
  for (const auto& [id, rec] : s.rounds) measured += rec.first == BobAction::Measure;
  std::cerr << role << ": session complete, " << s.rounds.size() << " rounds, " << measured
            << " measured\n";
  if (s.decoded) std::cout << s.decoded->str() << '\n';
  return 0;
}

int do_oracle(const std::string& eve) {
  using namespace sqlayer;
  const OracleTable t = detection_probability_oracle(parse_eve_spec(eve));
  std::cout << "category,mismatch_first,mismatch_second,mismatch_any\n";
  for (std::size_t i = 0; i < Category::kCount; ++i)
    std::cout << Category::from_index(i).name() << ',' << ojson(t[i].mismatch_first).dump()
              << ',' << ojson(t[i].mismatch_second).dump() << ','
              << ojson(t[i].mismatch_any).dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered semi-quantum key distribution and messaging simulator"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run a protocol session and write artifacts");
  run->add_option("--config", ra.config_file, "Run-config JSON file");
  run->add_option("--rounds", ra.rounds, "Number of rounds")->check(CLI::PositiveNumber);
  run->add_option("--seed", ra.seed, "Master seed");
  run->add_option("--protocol", ra.protocol, "SQKD or TLSQSC");
  run->add_option("--eve", ra.eve, "Intercept-resend spec link:dir:basis[,...] or none");
  run->add_option("--loss", ra.loss, "Loss spec [link:][dir:]p (repeatable)");
  run->add_option("--depol", ra.depol, "Depolarizing spec [link:][dir:]p (repeatable)");
  run->add_option("--threshold", ra.threshold, "Abort threshold on check mismatch rate")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--message", ra.message, "Trit string (e.g. 0121) or text:<bytes>");
  run->add_option("--transport", ra.transport, "inprocess or socket");
  run->add_option("--bob1", ra.bob1, "Bob1 endpoint host:port (socket transport)");
  run->add_option("--bob2", ra.bob2, "Bob2 endpoint host:port (socket transport)");
  run->add_option("--out-dir", ra.out_dir, "Output directory (default $SQLAYER_OUT_DIR)");

  std::string role, host = "127.0.0.1";
  std::uint16_t port = 0;
  std::uint64_t serve_seed = 0;
  auto* serve = app.add_subcommand("serve", "Serve one Bob over TCP for a socket run");
  serve->add_option("--role", role, "bob1 or bob2")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks one)");
  serve->add_option("--seed", serve_seed, "Seed for this participant's stream");

  std::string oracle_eve = "none";
  auto* oracle = app.add_subcommand("oracle", "Print exact per-category mismatch probabilities");
  oracle->add_option("--eve", oracle_eve, "Intercept-resend spec link:dir:basis[,...]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(ra, *run);
    if (*serve) return do_serve(role, host, port, serve_seed);
    if (*oracle) return do_oracle(oracle_eve);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
