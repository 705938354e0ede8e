// Command-line front end. Exit codes: 0 success, 1 negative answer of a
// boolean check, 2 usage error, 3 malformed input, 4 any other failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tela/tela.hpp"

namespace {

constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitFailure = 4;

// Reports parse errors with the file name so they can be told apart from
// other failures by the exit code.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
  std::ostringstream ss;
  if (path.empty() || path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    ss << in.rdbuf();
  }
  return ss.str();
}


template <class F>
auto parse_file(const std::string& path, F parse) {
  const std::string text = read_input(path);
  try {
    return parse(text);
  } catch (const tela::ParseError& e) {
    throw InputError((path.empty() ? std::string("<stdin>") : path) + ":" + e.what());
  } catch (const tela::PreconditionError& e) {
    throw InputError((path.empty() ? std::string("<stdin>") : path) + ": " + e.what());
  }
}

tela::Tela read_hoa(const std::string& path) {
  return parse_file(path, [](const std::string& t) { return tela::parse_hoa(t); });
}

std::string word_text(const tela::LassoWord& w) {
  std::string s;
  for (unsigned l : w.prefix) s += std::to_string(l) + " ";
  s += "|";
  for (unsigned l : w.cycle) s += " " + std::to_string(l);
  return s;
}

tela::LassoWord parse_word(const std::string& text) {
  auto bar = text.find('|');
  if (bar == std::string::npos) throw InputError("word: expected `prefix | cycle`");
  auto letters = [](const std::string& part) {
    std::istringstream is(part);
    std::vector<unsigned> v;
    std::string tok;
    while (is >> tok) {
      if (tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 3)
        throw InputError("word: letters are non-negative integers");
      v.push_back(static_cast<unsigned>(std::stoul(tok)));
    }
    return v;
  };
  tela::LassoWord w{letters(text.substr(0, bar)), letters(text.substr(bar + 1))};
  if (w.cycle.empty()) throw InputError("word: cycle must be non-empty");
  return w;
}

struct Limits {
  double timeout = 0;  // seconds, 0 = unlimited
  std::size_t max_states = 0;

  tela::Budget budget() const {
    tela::Budget b;
    if (timeout > 0)
      b.deadline = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                          std::chrono::duration<double>(timeout));
    if (max_states > 0) b.max_states = max_states;
    return b;
  }
};

void add_limits(CLI::App* cmd, Limits& l) {
  cmd->add_option("--timeout", l.timeout, "Time budget in seconds (0 = none)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-states", l.max_states, "State budget for constructions (0 = none)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transition-based Emerson-Lei automata toolkit"};
  app.require_subcommand(1);

  Limits limits;
  std::string input;

  // convert
  auto* convert = app.add_subcommand("convert", "Rewrite the acceptance structure of an automaton");
  std::string convert_to = "gba", convert_method = "remfin_rewrite";
  convert->add_option("input", input, "HOA file (default: stdin)");
  convert->add_option("--to", convert_to, "Target: gba, remfin, remfin-gba, dnf, complete")
      ->check(CLI::IsMember({"gba", "remfin", "remfin-gba", "dnf", "complete"}));
  convert->add_option("--method", convert_method, "GBA method for --to gba")
      ->check(CLI::IsMember({"cnf", "remfin_split", "split_remfin", "remfin_rewrite"}));
  add_limits(convert, limits);

  // determinize
  auto* det = app.add_subcommand("determinize", "Deterministic complete automaton");
  std::string det_method = "product";
  std::vector<std::string> det_methods{"product"};
  for (auto m : tela::kAllGbaMethods) det_methods.push_back("via-gba:" + std::string(tela::to_string(m)));
  det->add_option("input", input, "HOA file (default: stdin)");
  det->add_option("--method", det_method, "product or via-gba:<cnf|remfin_split|split_remfin|remfin_rewrite>")
      ->check(CLI::IsMember(det_methods));
  auto* no_langcover = det->add_flag("--no-langcover", "Keep product components whose language is already covered");
  add_limits(det, limits);

  // limitdet
  auto* ld = app.add_subcommand("limitdet", "Limit-deterministic automaton");
  std::string ld_method = "gfm", ld_bridge = "subsets";
  unsigned gfm_cap = tela::kGfmStateCap;
  ld->add_option("input", input, "HOA file (default: stdin)");
  ld->add_option("--method", ld_method, "sum, ld, or gfm")->check(CLI::IsMember({"ld", "gfm", "sum"}));
  ld->add_option("--bridge", ld_bridge, "GFM bridges: subsets or singletons")
      ->check(CLI::IsMember({"subsets", "singletons"}));
  ld->add_option("--gfm-state-cap", gfm_cap, "Largest input accepted by subset bridges");
  add_limits(ld, limits);

  // check
  auto* check = app.add_subcommand("check", "Boolean queries; exit 1 on a negative answer");
  std::string check_what, word;
  check->add_option("property", check_what, "empty, accepts, deterministic, complete, limitdet")
      ->required()
      ->check(CLI::IsMember({"empty", "accepts", "deterministic", "complete", "limitdet"}));
  check->add_option("input", input, "HOA file (default: stdin)");
  check->add_option("--word", word, "Lasso word `prefix | cycle` of letter indices (for accepts)");
  add_limits(check, limits);

  // mc
  auto* mc = app.add_subcommand("mc", "Model checking of an MDP against an automaton");
  std::string mdp_path, aut_path, mc_method = "gfm";
  double eps = tela::kValueIterationEpsilon;
  mc->add_option("--mdp", mdp_path, "MDP file")->required();
  mc->add_option("--aut", aut_path, "HOA file")->required();
  auto* qual = mc->add_flag("--qual", "Print POSITIVE or ZERO");
  auto* quant = mc->add_flag("--quant", "Print the maximal acceptance probability");
  qual->excludes(quant);
  mc->add_option("--method", mc_method, "gfm, gfm-singletons, or reference")
      ->check(CLI::IsMember({"gfm", "gfm-singletons", "reference"}));
  mc->add_option("--eps", eps, "Value iteration interval width")->check(CLI::PositiveNumber);
  mc->add_option("--gfm-state-cap", gfm_cap, "Largest input accepted by subset bridges");
  add_limits(mc, limits);

  // random
  auto* rnd = app.add_subcommand("random", "Random automaton from the benchmark distribution");
  tela::RandomParams rp;
  std::optional<std::uint64_t> seed;
  std::string acc_kind = "random-el";
  rnd->add_option("--states", rp.n_states, "Number of states (4..50)");
  rnd->add_option("--marks", rp.n_marks, "Number of acceptance marks (1..16)");
  rnd->add_option("--aps", rp.ap_count, "Number of atomic propositions");
  rnd->add_option("--density", rp.edge_density, "Transition probability (default 3/states)");
  rnd->add_option("--mark-prob", rp.mark_prob, "Probability of each mark on a transition");
  rnd->add_option("--acc", acc_kind, "random-el or dnf")->check(CLI::IsMember({"random-el", "dnf"}));
  rnd->add_option("--seed", seed, "Generator seed");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark harness; exit 1 on language mismatches");
  std::string config_path, report_path;
  bench->add_option("--config", config_path, "key=value configuration file")->required();
  bench->add_option("--report", report_path, "Report file (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const tela::Budget budget = limits.budget();
    tela::BudgetScope scope(budget);

    if (*convert) {
      tela::Tela a = read_hoa(input);
      tela::Tela r;
      if (convert_to == "gba") {
        r = tela::to_gba(a, *tela::parse_gba_method(convert_method));
      } else if (convert_to == "remfin") {
        auto p = tela::prepare_dnf(a);
        r = tela::remove_fin(p.automaton, p.dnf);
      } else if (convert_to == "remfin-gba") {
        auto p = tela::prepare_dnf(a);
        r = tela::remove_fin_gba(p.automaton, p.dnf);
      } else if (convert_to == "dnf") {
        auto p = tela::prepare_dnf(a);
        r = p.automaton;
        r.set_acceptance(p.dnf.to_formula(), r.mark_count());
      } else {
        r = tela::complete(a);
      }
      std::cout << tela::print_hoa(r);
      return 0;
    }

    if (*det) {
      tela::Tela a = read_hoa(input);
      tela::Tela r;
      if (det_method == "product")
        r = tela::determinize_product(a, !*no_langcover);
      else
        r = tela::determinize_via_gba(a, *tela::parse_gba_method(det_method.substr(det_method.find(':') + 1)));
      std::cout << tela::print_hoa(r);
      return 0;
    }

    if (*ld) {
      tela::Tela a = read_hoa(input);
      tela::Tela r;
      if (ld_method == "sum")
        r = tela::limit_det_sum(a);
      else if (ld_method == "ld")
        r = tela::build_ld(a).automaton;
      else
        r = tela::build_gfm(a, ld_bridge == "singletons" ? tela::BridgeMode::Singletons : tela::BridgeMode::AllSubsets,
                            gfm_cap)
                .automaton;
      std::cout << tela::print_hoa(r);
      return 0;
    }

    if (*check) {
      tela::Tela a = read_hoa(input);
      if (check_what == "empty") {
        auto lasso = tela::find_accepting_lasso(a);
        if (!lasso) {
          std::cout << "EMPTY\n";
          return 0;
        }
        std::cout << "NONEMPTY\n" << word_text(lasso->word()) << "\n";
        return kExitNegative;
      }
      if (check_what == "accepts") {
        if (word.empty()) throw InputError("check accepts: --word is required");
        auto w = parse_word(word);
        try {
          tela::check_word(a, w);
        } catch (const tela::PreconditionError& e) {
          throw InputError(e.what());
        }
        bool yes = tela::accepts(a, w);
        std::cout << (yes ? "ACCEPTED\n" : "REJECTED\n");
        return yes ? 0 : kExitNegative;
      }
      if (check_what == "limitdet") {
        // SYNTACTIC implies SEMANTIC; the syntactic check needs DNF acceptance.
        auto v = tela::check_limit_deterministic(a);
        if (!v.limit_deterministic) {
          std::cout << "NO\n";
          std::cerr << "accepting cycle inside the nondeterministic part:";
          for (const auto& t : v.violation->cycle) std::cerr << ' ' << t.src;
          std::cerr << "\n";
          return kExitNegative;
        }
        const bool syntactic =
            tela::match_dnf(a.acceptance()).has_value() && tela::is_syntactically_limit_deterministic(a);
        std::cout << (syntactic ? "SYNTACTIC\n" : "SEMANTIC\n");
        return 0;
      }
      const bool yes = check_what == "deterministic" ? tela::is_deterministic(a) : tela::is_complete(a);
      std::cout << (yes ? "YES\n" : "NO\n");
      return yes ? 0 : kExitNegative;
    }

    if (*mc) {
      tela::Mdp m = parse_file(mdp_path, [](const std::string& t) { return tela::parse_mdp(t); });
      tela::Tela a = read_hoa(aut_path);
      for (unsigned l : m.label)
        if (l >= a.letter_count()) throw InputError(mdp_path + ": label outside the automaton alphabet");
      if (!*quant) {
        // Qualitative analysis needs a limit-deterministic automaton.
        tela::Tela q = tela::is_limit_deterministic(a) ? a : tela::build_ld(a).automaton;
        std::cout << (tela::qualitative_positive(m, q) ? "POSITIVE\n" : "ZERO\n");
        return 0;
      }
      double p = 0;
      if (mc_method == "reference")
        p = tela::pr_max_reference(m, a, eps);
      else
        p = tela::pr_max_tela(m, a, mc_method == "gfm" ? tela::BridgeMode::AllSubsets : tela::BridgeMode::Singletons,
                              eps, gfm_cap);
      std::printf("%.12f\n", p);
      return 0;
    }

    if (*rnd) {
      rp.acc = *tela::parse_acc_kind(acc_kind);
      if (!seed) {
        seed = std::random_device{}();
        std::cerr << "seed " << *seed << "\n";
      }
      rp.seed = *seed;
      std::cout << tela::print_hoa(tela::random_tela(rp));
      return 0;
    }

    if (*bench) {
      auto cfg = parse_file(config_path, [](const std::string& t) { return tela::parse_bench_config(t); });
      if (!report_path.empty()) cfg.report_path = report_path;
      auto rep = tela::run_benchmark(cfg);
      std::cout << tela::format_table(rep);
      const std::string text = tela::format_report(rep);
      if (cfg.report_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(cfg.report_path);
        if (!out) throw std::runtime_error("cannot write " + cfg.report_path);
        out << text;
      }
      return rep.mismatches() == 0 ? 0 : kExitNegative;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const tela::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
