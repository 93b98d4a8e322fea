// relipop: sampling and estimation for root-connected and connected subgraphs
// under independent edge/arc failures.
//
//   sample-reach      draw root-connected arc subsets of a digraph
//   sample-connected  draw connected edge subsets of an undirected graph
//   estimate          reach probability / all-terminal reliability (FPRAS)
//   count-size        approximate count of connected subgraphs of a given size
//   exact             brute-force enumeration summary for small instances
//
// Exit codes: 0 success, 2 input error, 3 estimation failure (the failure
// report is printed to stdout as JSON).

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relipop/relipop.hpp"

namespace {

using nlohmann::json;
using namespace relipop;

struct CommonArgs {
  std::string file;
  std::string seed_text = "1";
  bool json_output = false;
  bool allow_boundary = false;
};

std::uint64_t parse_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("seed must be a non-negative integer or 'random'");
  return value;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

json graph_summary(const ParsedGraph& g) {
  json out;
  if (std::holds_alternative<UndirectedGraph>(g)) {
    const auto& u = std::get<UndirectedGraph>(g);
    out["kind"] = "undirected";
    out["vertices"] = u.vertex_count();
    out["edges"] = u.edge_count();
  } else {
    const auto& d = std::get<DirectedMultigraph>(g);
    out["kind"] = "digraph";
    out["vertices"] = d.vertex_count();
    out["arcs"] = d.arc_count();
    out["root"] = d.root();
    out["bidirected_pairing"] = d.has_twins();
  }
  return out;
}

json stats_json(const PoppingStats& s) {
  return json{{"arcs_rerandomized", s.arcs_rerandomized},
              {"popped_clusters", s.popped_clusters},
              {"rounds", s.rounds}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

const UndirectedGraph& require_undirected(const ParsedGraph& g, const char* command) {
  if (!std::holds_alternative<UndirectedGraph>(g))
    throw std::invalid_argument(std::string(command) +
                                " expects an undirected input ('undirected <n> <m>' header)");
  return std::get<UndirectedGraph>(g);
}

const DirectedMultigraph& require_digraph(const ParsedGraph& g, const char* command) {
  if (!std::holds_alternative<DirectedMultigraph>(g))
    throw std::invalid_argument(std::string(command) +
                                " expects a digraph input ('digraph <n> <m> root=<r>' header)");
  return std::get<DirectedMultigraph>(g);
}

// Draws `count` subsets in parallel, one RNG stream per sample index.
template <typename Sampler>
std::vector<std::vector<int>> draw_samples(std::uint64_t count, unsigned threads,
                                           std::vector<PoppingStats>& worker_stats,
                                           Sampler&& one_sample) {
  std::vector<std::vector<int>> out(count);
  worker_stats.assign(worker_count(count, threads), PoppingStats{});
  parallel_for(count, threads, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t j = begin; j < end; ++j) out[j] = one_sample(w, j, worker_stats[w]);
  });
  return out;
}

int cmd_sample_reach(const CommonArgs& args, std::uint64_t samples, std::int64_t round_cap,
                     unsigned threads) {
  ParsedGraph parsed = parse_graph_file(args.file, {args.allow_boundary});
  const DirectedMultigraph& g = require_digraph(parsed, "sample-reach");
  std::uint64_t seed = parse_seed(args.seed_text);

  SampleOptions opts;
  if (round_cap > 0) opts.round_cap = static_cast<std::uint64_t>(round_cap);
  if (round_cap == 0) opts.round_cap = std::nullopt;  // explicit "no cap"
  {
    ClusterPopper validate(g, opts);  // reject non-root-connected inputs before any output
    (void)validate;
  }

  std::vector<PoppingStats> worker_stats;
  auto sets = draw_samples(samples, threads, worker_stats,
                           [&](unsigned, std::uint64_t j, PoppingStats& stats) {
                             ClusterPopper popper(g, opts);
                             Rng rng(seed, j);
                             return popper.sample_set(rng, stats).sorted_ids();
                           });
  PoppingStats stats;
  for (const auto& s : worker_stats) stats.merge(s);

  if (args.json_output) {
    json j;
    j["command"] = "sample-reach";
    j["graph"] = graph_summary(parsed);
    j["samples"] = sets;
    j["samples_requested"] = samples;
    j["seed"] = seed;
    j["stats"] = stats_json(stats);
    emit(j);
  } else {
    for (const auto& s : sets) {
      for (size_t i = 0; i < s.size(); ++i) std::cout << (i ? " " : "") << s[i];
      std::cout << "\n";
    }
    std::cout << "# samples=" << samples << " popped_clusters=" << stats.popped_clusters
              << " rounds=" << stats.rounds << " arcs_rerandomized=" << stats.arcs_rerandomized
              << "\n";
  }
  return 0;
}

int cmd_sample_connected(const CommonArgs& args, std::uint64_t samples, unsigned threads) {
  ParsedGraph parsed = parse_graph_file(args.file, {args.allow_boundary});
  const UndirectedGraph& g = require_undirected(parsed, "sample-connected");
  std::uint64_t seed = parse_seed(args.seed_text);
  if (!is_connected(g))
    throw std::invalid_argument("graph is not connected: no edge subset spans it");

  DirectedMultigraph lifted = bidirect(g, 0);
  std::vector<PoppingStats> worker_stats;
  auto sets = draw_samples(samples, threads, worker_stats,
                           [&](unsigned, std::uint64_t j, PoppingStats& stats) {
                             ClusterPopper popper(lifted);
                             Rng rng(seed, j);
                             IndexSet arcs = popper.sample_set(rng, stats);
                             return psi(lifted, arcs, 0).image.sorted_ids();
                           });
  PoppingStats stats;
  for (const auto& s : worker_stats) stats.merge(s);

  if (args.json_output) {
    json j;
    j["command"] = "sample-connected";
    j["graph"] = graph_summary(parsed);
    j["samples"] = sets;
    j["samples_requested"] = samples;
    j["seed"] = seed;
    j["stats"] = stats_json(stats);
    emit(j);
  } else {
    for (const auto& s : sets) {
      for (size_t i = 0; i < s.size(); ++i) std::cout << (i ? " " : "") << s[i];
      std::cout << "\n";
    }
    std::cout << "# samples=" << samples << " popped_clusters=" << stats.popped_clusters
              << " rounds=" << stats.rounds << " arcs_rerandomized=" << stats.arcs_rerandomized
              << "\n";
  }
  return 0;
}

json report_json(const EstimateReport& r) {
  json j;
  j["estimate"] = r.estimate;
  j["log_estimate"] = r.log_estimate;
  j["epsilon"] = r.epsilon;
  j["delta"] = r.delta;
  j["per_step_samples"] = r.per_step_samples;
  j["per_step_means"] = r.per_step_means;
  j["total_popped"] = r.total_popped;
  j["wall_notes"] = r.wall_notes;
  return j;
}

int cmd_estimate(const CommonArgs& args, double eps, double delta, bool high_p,
                 unsigned threads) {
  ParsedGraph parsed = parse_graph_file(args.file, {args.allow_boundary});
  std::uint64_t seed = parse_seed(args.seed_text);

  EstimateReport report;
  if (high_p) {
    const DirectedMultigraph lifted =
        std::holds_alternative<UndirectedGraph>(parsed)
            ? bidirect(std::get<UndirectedGraph>(parsed), 0)
            : std::get<DirectedMultigraph>(parsed);
    double p = 0.0;
    if (!lifted.uniform_fail_prob(&p))
      throw std::invalid_argument("--high-p requires one uniform failure probability");
    report = highp_estimate(lifted, p, eps, delta, seed, threads);
  } else if (std::holds_alternative<UndirectedGraph>(parsed)) {
    report = estimate_reliability(std::get<UndirectedGraph>(parsed), eps, delta, seed, threads);
  } else {
    report = estimate_reach(std::get<DirectedMultigraph>(parsed), eps, delta, seed, threads);
  }

  if (args.json_output) {
    json j = report_json(report);
    j["command"] = "estimate";
    j["graph"] = graph_summary(parsed);
    j["high_p"] = high_p;
    j["seed"] = seed;
    emit(j);
  } else {
    std::cout << "estimate " << format_double(report.estimate) << " (log "
              << format_double(report.log_estimate) << ")\n"
              << "epsilon " << format_double(report.epsilon) << " delta "
              << format_double(report.delta) << " per-step samples " << report.per_step_samples
              << "\n"
              << "total popped clusters " << report.total_popped << "\n";
  }
  return 0;
}

int cmd_count_size(const CommonArgs& args, int t, double eps, double delta,
                   std::uint64_t samples_per_level, unsigned threads) {
  ParsedGraph parsed = parse_graph_file(args.file, {args.allow_boundary});
  const UndirectedGraph& g = require_undirected(parsed, "count-size");
  std::uint64_t seed = parse_seed(args.seed_text);

  FixedSizeOptions opts;
  opts.samples_per_level = samples_per_level;
  opts.threads = threads;
  FixedSizeResult result = estimate_fixed_size(g, t, eps, delta, seed, opts);

  if (args.json_output) {
    json j = report_json(result.report);
    j["command"] = "count-size";
    j["graph"] = graph_summary(parsed);
    j["t"] = t;
    j["exact"] = result.exact;
    j["seed"] = seed;
    json levels = json::array();
    for (const auto& lv : result.levels)
      levels.push_back(json{{"level", lv.level},
                            {"hits_low", lv.hits_low},
                            {"hits_high", lv.hits_high},
                            {"samples", lv.samples},
                            {"ratio", lv.ratio}});
    j["levels"] = levels;
    emit(j);
  } else {
    std::cout << "count of connected subgraphs with " << t << " edges: "
              << format_double(result.report.estimate) << " (log "
              << format_double(result.report.log_estimate) << ")"
              << (result.exact ? " [exact]" : "") << "\n";
    if (!result.exact)
      std::cout << "levels " << result.levels.size() << ", samples per level "
                << result.report.per_step_samples << ", total popped clusters "
                << result.report.total_popped << "\n";
  }
  return 0;
}

int cmd_exact(const CommonArgs& args) {
  ParsedGraph parsed = parse_graph_file(args.file, {args.allow_boundary});
  json j;
  j["command"] = "exact";
  j["graph"] = graph_summary(parsed);

  if (std::holds_alternative<UndirectedGraph>(parsed)) {
    const auto& g = std::get<UndirectedGraph>(parsed);
    EnumerationResult res = enumerate_rel(g, false);
    j["log_z0"] = res.log_z0;
    j["z0"] = std::exp(res.log_z0);
    json zk;
    for (auto [k, lz] : res.log_z_by_bad_count) zk[std::to_string(k)] = std::exp(lz);
    j["z_by_bad_count"] = zk;
    json sizes;
    std::uint64_t good = 0;
    for (auto [size, count] : res.counts_by_size) {
      sizes[std::to_string(size)] = count;
      good += count;
    }
    j["counts_by_size"] = sizes;
    j["good_subsets"] = good;
    j["spanning_trees"] = count_spanning_trees(g).str();
    if (args.json_output) {
      emit(j);
    } else {
      std::cout << "connected subsets: " << good << ", Pr[connected] = "
                << format_double(std::exp(res.log_z0)) << "\n"
                << "spanning trees: " << j["spanning_trees"].get<std::string>() << "\n";
    }
  } else {
    const auto& g = std::get<DirectedMultigraph>(parsed);
    EnumerationResult res = enumerate_reach(g, false);
    j["log_z0"] = res.log_z0;
    j["z0"] = std::exp(res.log_z0);
    json zk;
    for (auto [k, lz] : res.log_z_by_bad_count) zk[std::to_string(k)] = std::exp(lz);
    j["z_by_bad_count"] = zk;
    json sizes;
    std::uint64_t good = 0;
    for (auto [size, count] : res.counts_by_size) {
      sizes[std::to_string(size)] = count;
      good += count;
    }
    j["counts_by_size"] = sizes;
    j["good_subsets"] = good;
    j["expected_popped"] = res.expected_popped();
    j["arborescences"] = count_arborescences(g).str();
    if (args.json_output) {
      emit(j);
    } else {
      std::cout << "root-connected subsets: " << good << ", Pr[root-connected] = "
                << format_double(std::exp(res.log_z0)) << "\n"
                << "expected popped clusters: " << format_double(res.expected_popped()) << "\n"
                << "arborescences: " << j["arborescences"].get<std::string>() << "\n";
    }
  }
  return 0;
}

json failure_json(const char* kind, const std::string& message) {
  return json{{"error", json{{"kind", kind}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-popping samplers and estimators for network reliability"};
  app.require_subcommand(1);

  unsigned threads = 1;
  if (const char* env = std::getenv("RELIPOP_THREADS")) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::string_view(env).size(), v);
    if (ec == std::errc() && ptr == env + std::string_view(env).size() && v >= 1) threads = v;
  }
  app.add_option("--threads", threads, "worker threads (env RELIPOP_THREADS)")
      ->check(CLI::Range(1u, 256u));

  CommonArgs sr_args, sc_args, es_args, cs_args, ex_args;
  std::uint64_t sr_samples = 1, sc_samples = 1;
  std::int64_t sr_round_cap = -1;  // -1: defaults; 0: no cap; >0: cap
  double es_eps = 0.3, es_delta = 0.05;
  bool es_high_p = false;
  int cs_t = -1;
  double cs_eps = 0.3, cs_delta = 0.05;
  std::uint64_t cs_samples_per_level = 0;

  auto add_common = [](CLI::App* sub, CommonArgs& c) {
    sub->add_option("file", c.file, "input graph file")->required();
    sub->add_option("--seed", c.seed_text, "RNG seed: non-negative integer or 'random'");
    sub->add_flag("--json", c.json_output, "emit JSON on stdout");
    sub->add_flag("--allow-boundary", c.allow_boundary,
                  "admit failure probabilities of exactly 0 or 1");
  };

  CLI::App* sr = app.add_subcommand("sample-reach", "draw root-connected arc subsets");
  add_common(sr, sr_args);
  sr->add_option("--samples", sr_samples, "number of draws")->check(CLI::PositiveNumber);
  sr->add_option("--round-cap", sr_round_cap,
                 "cap on popping rounds per draw (0: none; default: none for bi-directed "
                 "inputs, 1000000 otherwise)");

  CLI::App* sc = app.add_subcommand("sample-connected", "draw connected edge subsets");
  add_common(sc, sc_args);
  sc->add_option("--samples", sc_samples, "number of draws")->check(CLI::PositiveNumber);

  CLI::App* es = app.add_subcommand(
      "estimate", "estimate Pr[root-connected] (digraph) or Pr[connected] (undirected)");
  add_common(es, es_args);
  es->add_option("--eps", es_eps, "relative accuracy target")->check(CLI::Range(1e-9, 0.999999));
  es->add_option("--delta", es_delta, "failure probability")->check(CLI::Range(1e-12, 0.999999));
  es->add_flag("--high-p", es_high_p,
               "plug-in estimator for uniform failure probability above 1 - 1/(3m)");

  CLI::App* cs =
      app.add_subcommand("count-size", "approximate count of connected subgraphs of size t");
  add_common(cs, cs_args);
  cs->add_option("--t", cs_t, "edge count of the subgraphs to count")->required();
  cs->add_option("--eps", cs_eps, "relative accuracy target")->check(CLI::Range(1e-9, 0.999999));
  cs->add_option("--delta", cs_delta, "failure probability")->check(CLI::Range(1e-12, 0.999999));
  cs->add_option("--samples-per-level", cs_samples_per_level,
                 "override the per-level sample budget (default: 50 m^3 (m-t)^2 eps^-2)");

  CLI::App* ex = app.add_subcommand("exact", "brute-force enumeration summary (up to 24 arcs/edges)");
  add_common(ex, ex_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sr)) return cmd_sample_reach(sr_args, sr_samples, sr_round_cap, threads);
    if (app.got_subcommand(sc)) return cmd_sample_connected(sc_args, sc_samples, threads);
    if (app.got_subcommand(es)) return cmd_estimate(es_args, es_eps, es_delta, es_high_p, threads);
    if (app.got_subcommand(cs))
      return cmd_count_size(cs_args, cs_t, cs_eps, cs_delta, cs_samples_per_level, threads);
    if (app.got_subcommand(ex)) return cmd_exact(ex_args);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const LadderFailure& e) {
    json j = failure_json("ladder-failure", e.what());
    j["error"]["level"] = e.info.level;
    j["error"]["ratio"] = e.info.ratio;
    j["error"]["reason"] = e.info.reason;
    emit(j);
    return 3;
  } catch (const EstimationError& e) {
    emit(failure_json("estimation-error", e.what()));
    return 3;
  } catch (const RoundCapExceeded& e) {
    json j = failure_json("round-cap-exceeded", e.what());
    j["error"]["cap"] = e.cap;
    emit(j);
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
