#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <memory>

#include "edw/belief_io.hpp"
#include "edw/chess.hpp"
#include "edw/errors.hpp"
#include "edw/render.hpp"
#include "edw/tm.hpp"
#include "edw/worldlang.hpp"

namespace {

// 0 success, 1 input error, 2 runtime fault.
constexpr int kInputError = 1;
constexpr int kFault = 2;

std::uint64_t default_seed() {
  const char* s = std::getenv("EDW_SEED");
  if (!s || !*s) return 1;
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw edw::ArgumentError(std::string("EDW_SEED is not a number: ") + s);
  }
}

struct RunArgs {
  std::string world;
  std::string policy = "random";
  std::uint64_t seed = 0;
  std::size_t steps = 100;
  std::string render = "stream";
  std::size_t window = 50;
  int depth = 64;
};

int cmd_run(const RunArgs& a) {
  edw::WorldDescription wd = edw::load_world(a.world);
  for (const auto& d : edw::validate(wd))
    if (d.error()) throw edw::DescriptionError(edw::format(d, a.world));
  edw::EngineOptions opts;
  opts.exec_depth = a.depth;
  opts.reply_depth = a.depth;
  edw::Engine e(std::move(wd), opts);
  edw::WorldState ws = e.init(a.seed);
  std::vector<std::unique_ptr<edw::Policy>> owned;
  std::map<int, edw::Policy*> policies;
  for (int g : e.acting_agents()) {
    owned.push_back(edw::make_policy(a.policy, e.world().alphabets, a.seed + static_cast<std::uint64_t>(g)));
    policies[g] = owned.back().get();
  }
  edw::EpisodeHooks hooks;
  if (a.render == "jsonl")
    hooks.after_step = [&](const edw::WorldState&, const edw::StreamEntry& en, const edw::StepResult&) {
      std::cout << edw::render_jsonl(en, e.world().alphabets);
    };
  edw::StreamLog log;
  if (a.steps > 0) log = edw::run_episode(e, ws, policies, a.steps, hooks);
  if (a.render == "stream") {
    std::cout << edw::render_stream(log, e.world().alphabets, a.window);
  } else if (a.render == "board") {
    std::cout << edw::render_board(e, ws, policies.begin()->first);
  }
  if (!log.empty() && log.back().terminal) std::cerr << "terminal position after step " << log.back().t << "\n";
  return 0;
}

int cmd_validate(const std::string& path) {
  edw::ParseResult r = edw::parse_world(edw::read_file(path));
  bool errors = false;
  for (const auto& d : r.diagnostics) {
    std::cout << edw::format(d, path) << "\n";
    errors = errors || d.error();
  }
  return errors ? kInputError : 0;
}

struct TmArgs {
  std::string table;
  std::string out;
  std::string tape;
  std::int64_t head = 0;
  std::size_t verify = 0;
};

int cmd_compile_tm(const TmArgs& a) {
  edw::TMSpec spec = edw::parse_tm(edw::read_file(a.table));
  edw::TMConfig init = edw::tape_config(a.tape, a.head);
  std::string text = edw::serialize_world(edw::compile_tm(spec, init));
  if (a.out.empty() || a.out == "-")
    std::cout << text;
  else
    edw::write_file(a.out, text);
  if (a.verify > 0) {
    auto parsed = edw::parse_world(text);
    if (!parsed.world) throw edw::EngineFault("compiled world does not parse back");
    edw::CosimReport rep = edw::cosimulate_world(spec, *parsed.world, init, a.verify);
    if (!rep.ok) {
      std::cerr << "divergence at machine step " << rep.divergence << ": " << rep.message << "\n";
      return kFault;
    }
    std::cerr << "verified " << rep.steps << " machine steps\n";
  }
  return 0;
}

int cmd_belief(const std::string& world, const std::string& script) {
  edw::BeliefWorld bw = edw::load_belief_world(world);
  edw::BeliefScript sc = edw::load_belief_script(script);
  std::cout << edw::belief_report(bw, sc);
  return 0;
}

int cmd_chess(const std::string& variant, std::uint64_t seed, const std::string& out) {
  edw::ChessWorldConfig cfg;
  if (variant == "solitaire")
    cfg.variant = edw::ChessVariant::Solitaire;
  else if (variant == "two-agent")
    cfg.variant = edw::ChessVariant::TwoAgent;
  else
    throw edw::ArgumentError("unknown chess variant " + variant);
  cfg.seed = seed;
  std::string text = edw::serialize_world(edw::build_chess(cfg));
  if (out.empty() || out == "-")
    std::cout << text;
  else
    edw::write_file(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven world description interpreter"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run an episode and render it");
  run_cmd->add_option("world", run.world, "world description file")->required();
  run_cmd->add_option("--policy", run.policy, "random, surveillance, forced or script:<path>");
  auto* seed_opt = run_cmd->add_option("--seed", run.seed, "seed (default from EDW_SEED, else 1)");
  run_cmd->add_option("--steps", run.steps, "micro-steps to run");
  run_cmd->add_option("--render", run.render, "stream, board or jsonl")
      ->check(CLI::IsMember({"stream", "board", "jsonl"}));
  run_cmd->add_option("--window", run.window, "stream window width");
  run_cmd->add_option("--depth", run.depth, "search depth for exec literals and replies");

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "print diagnostics for a world file");
  val_cmd->add_option("world", validate_path, "world description file")->required();

  TmArgs tm;
  auto* tm_cmd = app.add_subcommand("compile-tm", "compile a Turing machine table to a world");
  tm_cmd->add_option("table", tm.table, "machine table file")->required();
  tm_cmd->add_option("-o,--out", tm.out, "output path (default stdout)");
  tm_cmd->add_option("--tape", tm.tape, "initial tape bits, cell 0 first");
  tm_cmd->add_option("--head", tm.head, "initial head position");
  tm_cmd->add_option("--verify", tm.verify, "cosimulate this many machine steps");

  std::string belief_world, belief_script;
  auto* bel_cmd = app.add_subcommand("belief", "replay an action/observation script through the belief update");
  bel_cmd->add_option("world", belief_world, "finite world table")->required();
  bel_cmd->add_option("script", belief_script, "script of action/observation pairs")->required();

  std::string variant = "solitaire", chess_out;
  std::uint64_t chess_seed = 1;
  auto* chess_cmd = app.add_subcommand("chess", "emit the chess world description");
  chess_cmd->add_option("--variant", variant, "solitaire or two-agent");
  chess_cmd->add_option("--seed", chess_seed, "seed for the property models");
  chess_cmd->add_option("-o,--out", chess_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*run_cmd) {
      if (seed_opt->count() == 0) run.seed = default_seed();
      return cmd_run(run);
    }
    if (*val_cmd) return cmd_validate(validate_path);
    if (*tm_cmd) return cmd_compile_tm(tm);
    if (*bel_cmd) return cmd_belief(belief_world, belief_script);
    if (*chess_cmd) return cmd_chess(variant, chess_seed, chess_out);
  } catch (const edw::DescriptionError& e) {
    std::cerr << e.what() << "\n";
    return kInputError;
  } catch (const edw::CompileError& e) {
    std::cerr << e.what() << "\n";
    return kInputError;
  } catch (const edw::ArgumentError& e) {
    std::cerr << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kFault;
  }
  return 0;
}
