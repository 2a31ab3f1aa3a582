#ifndef KSENT_TOOLS_CLI_APP_HPP
#define KSENT_TOOLS_CLI_APP_HPP

// Command-line front end. Every subcommand writes deterministic text: identical
// arguments, configs and seeds give byte-identical output.
//
// Exit codes: 0 success / verdict holds, 1 input error, 2 verdict violated,
// 3 verdict inconclusive.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ksent/ksent.hpp"

namespace ksent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitViolated = 2;
inline constexpr int kExitInconclusive = 3;

inline constexpr const char* kBudgetEnv = "KSENT_ENUM_BUDGET";

inline Limits limits_from_env() {
    Limits limits;
    if (const char* v = std::getenv(kBudgetEnv)) {
        char* end = nullptr;
        const unsigned long long b = std::strtoull(v, &end, 10);
        require(end && *end == '\0' && b > 0, std::string(kBudgetEnv) + " must be a positive integer");
        limits.max_words = b;
    }
    return limits;
}

inline int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::Holds: return kExitOk;
        case Verdict::Violated: return kExitViolated;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitInputError;
}

inline std::string num(double x) { return format_decimal(x); }

/// Writes to `path`, or to `fallback` when path is empty.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            require(file_.good(), "cannot write " + path);
            out_ = &file_;
        } else {
            out_ = &fallback;
        }
    }
    std::ostream& operator*() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

// ---------------------------------------------------------------------------
// Measure specs inside experiment configs

struct Resolver {
    std::filesystem::path base_dir;
    Limits limits;

    std::string path(const std::string& p) const {
        const std::filesystem::path fp(p);
        return (fp.is_absolute() ? fp : base_dir / fp).string();
    }

    StationaryMeasure measure(const Json& spec) const {
        if (spec.is_string()) return load_measure(path(spec.get<std::string>()));
        require(spec.is_object(), "measure spec must be a path or an object");
        if (spec.contains("kind")) return from_document(spec);
        if (spec.contains("random_markov")) {
            const auto& r = spec.at("random_markov");
            return random_markov(r.at("alphabet_size").get<std::size_t>(), r.value("order", std::size_t{1}),
                                 r.value("seed", std::uint64_t{0}), r.value("zero_fraction", 0.0));
        }
        if (spec.contains("geometric")) {
            const auto& g = spec.at("geometric");
            const auto policy = g.value("policy", std::string("merge_tail"));
            require(policy == "merge_tail" || policy == "renormalize", "unknown tail policy " + policy);
            return bernoulli_from_weights(truncate_countable(
                geometric_half(), {g.at("K").get<std::size_t>(),
                                   policy == "merge_tail" ? TailPolicy::MergeTail : TailPolicy::Renormalize}));
        }
        if (spec.contains("suspension")) return suspension(spec.at("suspension")).measure;
        throw InvalidInput("unrecognized measure spec");
    }

    SuspensionSystem suspension(const Json& spec) const {
        require(spec.is_object() && spec.contains("base") && spec.contains("ceiling"),
                "suspension spec needs \"base\" and \"ceiling\"");
        return build_suspension(measure(spec.at("base")), spec.at("ceiling").get<CeilingFunction>(), limits);
    }
};

inline Json load_config(const std::string& path) {
    require(std::filesystem::exists(path), "config file not found: " + path);
    return read_json_file(path);
}

inline std::string measure_id(const std::string& path) {
    try {
        const auto doc = read_json_file(path);
        if (doc.is_object() && doc.contains("id") && doc.at("id").is_string()) return doc.at("id").get<std::string>();
    } catch (const InvalidInput&) {
    }
    return std::filesystem::path(path).stem().string();
}

// ---------------------------------------------------------------------------
// Families

struct FamilySpec {
    ApproximationFamily family;
    ExperimentOptions options;
};

inline FamilySpec family_from_config(const Json& cfg, const Resolver& res) {
    require(cfg.contains("target"), "experiment config needs \"target\"");
    const StationaryMeasure target = res.measure(cfg.at("target"));
    ExperimentOptions opt;
    opt.limits = res.limits;
    opt.tolerance = cfg.value("tolerance", opt.tolerance);
    opt.bracket_depth = cfg.value("bracket_depth", opt.bracket_depth);
    if (cfg.contains("tail_start")) opt.tail_start = cfg.at("tail_start").get<std::size_t>();

    const Json approx = cfg.value("approximants", Json("hulls"));
    std::vector<std::size_t> orders;
    if (cfg.contains("orders")) {
        const auto range = cfg.at("orders").get<std::vector<std::size_t>>();
        require(range.size() == 2 && range[0] >= 1 && range[0] <= range[1], "\"orders\" must be [lo, hi]");
        for (std::size_t n = range[0]; n <= range[1]; ++n) orders.push_back(n);
    }

    ApproximationFamily fam{target, {}, {}, {}, {}, false};
    if (approx.is_string()) {
        require(approx.get<std::string>() == "hulls", "approximants must be \"hulls\" or a list of measure specs");
        require(!orders.empty(), "hull families need \"orders\": [lo, hi]");
        fam.hulls = true;
        for (std::size_t n : orders) {
            fam.approximants.push_back(markov_hull(target, n, {}, res.limits).hull);
            fam.index.push_back(n);
        }
    } else {
        require(approx.is_array() && !approx.empty(), "approximants list is empty");
        for (std::size_t i = 0; i < approx.size(); ++i) {
            fam.approximants.push_back(res.measure(approx[i]));
            fam.index.push_back(orders.empty() ? i + 1 : orders.at(i));
        }
    }

    const std::size_t count = fam.approximants.size();
    const Json r = cfg.value("r", Json("n"));
    if (r.is_string()) {
        require(r.get<std::string>() == "n", "\"r\" must be \"n\" or a list");
        fam.r = fam.index;
    } else {
        fam.r = r.get<std::vector<std::size_t>>();
    }
    const Json eps = cfg.value("eps", Json::object({{"scale", 0.1}}));
    if (eps.is_object()) {
        const double scale = eps.value("scale", 0.1);
        for (std::size_t n : fam.index) fam.eps.push_back(scale / static_cast<double>(n));
    } else {
        fam.eps = eps.get<std::vector<double>>();
    }
    require(fam.r.size() == count && fam.eps.size() == count, "r and eps schedules must match the family size");
    fam.validate();
    return {std::move(fam), opt};
}

inline Json hypothesis_json(const HypothesisReport& h) {
    Json zero = Json::array();
    for (const auto& w : h.zero_mismatch) zero.push_back(word_to_string(w));
    return {{"n", h.n},
            {"r", h.r},
            {"eps", h.eps},
            {"max_ratio", h.max_ratio},
            {"worst_word", word_to_string(h.worst_word)},
            {"max_ratio_by_length", h.max_ratio_by_length},
            {"holds", h.holds},
            {"zero_mismatch_count", h.zero_mismatch_count},
            {"zero_mismatch", zero},
            {"ratio_flip", {{"checked", h.flip_checked}, {"holds", h.flip_holds}}},
            {"lemma_replay",
             {{"applicable", h.replay.applicable},
              {"c", h.replay.c},
              {"H_approximant", h.replay.H_approx},
              {"H_target", h.replay.H_target},
              {"bound", h.replay.bound},
              {"holds", h.replay.holds}}}};
}

inline Json bracket_json(const EntropyBracket& b) { return {{"lower", b.lower.nats}, {"upper", b.upper.nats}}; }

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_entropy(const std::string& measure_path, std::size_t n_max, const std::string& out_path,
                       const Limits& limits, std::ostream& out) {
    require(n_max >= 1, "--n-max must be at least 1");
    const auto m = load_measure(measure_path);
    const auto id = measure_id(measure_path);
    Sink sink(out_path, out);
    *sink << "measure_id,n,H_n,H_n_over_n,H_next_minus_H_n\n";
    double h_prev = block_entropy(m, 1, limits).nats;
    for (std::size_t n = 1; n <= n_max; ++n) {
        const double h_next = block_entropy(m, n + 1, limits).nats;
        *sink << id << ',' << n << ',' << num(h_prev) << ',' << num(h_prev / static_cast<double>(n)) << ','
              << num(h_next - h_prev) << '\n';
        h_prev = h_next;
    }
    return kExitOk;
}

inline int cmd_hull(const std::string& measure_path, std::size_t order, const std::string& out_path,
                    const std::string& save_path, const Limits& limits, std::ostream& out) {
    require(order >= 1, "--order must be at least 1");
    const auto m = load_measure(measure_path);
    const auto id = measure_id(measure_path);
    const auto hull = markov_hull(m, order, id, limits);
    const auto& chain = *hull.hull.as_markov();
    const std::size_t k = chain.alphabet_size();
    Sink sink(out_path, out);
    *sink << "# kernel of the order-" << order << " hull of " << id << '\n';
    *sink << "memory_word,symbol,probability\n";
    for (WordIndex w = 0; w < chain.memory_words(); ++w)
        for (Symbol a = 0; a < k; ++a)
            *sink << word_to_string(decode_word(w, k, order)) << ',' << a << ',' << num(chain.transition(w, a)) << '\n';
    *sink << "# flagged_rows (zero source probability, uniform row)\n";
    for (WordIndex w : hull.flagged_rows) *sink << word_to_string(decode_word(w, k, order)) << '\n';
    *sink << "# entropy\n";
    *sink << "n,hull_rate,source_conditional_entropy,difference\n";
    for (std::size_t n = 1; n <= order; ++n) {
        const double rate = n == order ? hull_entropy_rate(hull).nats
                                       : hull_entropy_rate(markov_hull(m, n, id, limits)).nats;
        const double cond = conditional_block_entropy(m, n, limits).nats;
        *sink << n << ',' << num(rate) << ',' << num(cond) << ',' << num(rate - cond) << '\n';
    }
    if (!save_path.empty()) save_measure(hull.hull, save_path);
    return kExitOk;
}

inline int cmd_lemma_fuzz(std::size_t trials, std::uint64_t seed, std::size_t max_atoms, const std::string& out_path,
                          std::ostream& out) {
    const auto rep = lemma_fuzz(trials, seed, max_atoms);
    Sink sink(out_path, out);
    *sink << "trials,attempts,violations,min_slack,worst_c\n";
    *sink << rep.trials << ',' << rep.attempts << ',' << rep.violations << ',' << num(rep.min_slack) << ','
          << num(rep.worst_c) << '\n';
    require(rep.trials == trials, "could not generate enough admissible triples");
    return rep.violations == 0 ? kExitOk : kExitViolated;
}

inline int cmd_theorem1(const std::string& config_path, const std::string& json_path, const std::string& csv_path,
                        const Limits& limits, std::ostream& out, std::ostream& err) {
    const Json cfg = load_config(config_path);
    const Resolver res{std::filesystem::path(config_path).parent_path(), limits};
    const auto spec = family_from_config(cfg, res);
    const auto rep = theorem1_experiment(spec.family, spec.options);
    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';

    Json approx = Json::array();
    for (std::size_t i = 0; i < rep.approximants.size(); ++i) {
        const auto& a = rep.approximants[i];
        approx.push_back({{"n", a.n},
                          {"rate", bracket_json(a.rate)},
                          {"in_tail", i >= rep.tail_start},
                          {"hypothesis", hypothesis_json(a.hypothesis)}});
    }
    Json doc = {{"experiment", "theorem1"},
                {"target_rate", bracket_json(rep.target_rate)},
                {"target_rate_exact", spec.family.target.has_exact_rate()},
                {"approximants", approx},
                {"hull_family", spec.family.hulls},
                {"limsup_rendering", "max over family positions >= tail_start"},
                {"tail_start_n", spec.family.index[rep.tail_start]},
                {"tail_max", {{"lower", rep.tail_max_lower}, {"upper", rep.tail_max_upper}}},
                {"hypotheses_hold", rep.hypotheses_hold},
                {"hull_monotone", rep.hull_monotone},
                {"tolerance", spec.options.tolerance},
                {"warnings", rep.warnings},
                {"verdict", to_string(rep.verdict)}};
    {
        Sink sink(json_path, out);
        *sink << doc.dump(2) << '\n';
    }
    const std::string csv = !csv_path.empty() ? csv_path : (cfg.contains("csv_out") ? res.path(cfg.at("csv_out")) : "");
    if (!csv.empty()) {
        Sink sink(csv, out);
        *sink << "n,r,eps,max_ratio,hypothesis_holds,rate_lower,rate_upper,in_tail\n";
        for (std::size_t i = 0; i < rep.approximants.size(); ++i) {
            const auto& a = rep.approximants[i];
            *sink << a.n << ',' << a.hypothesis.r << ',' << num(a.hypothesis.eps) << ',' << num(a.hypothesis.max_ratio)
                  << ',' << (a.hypothesis.holds ? 1 : 0) << ',' << num(a.rate.lower.nats) << ','
                  << num(a.rate.upper.nats) << ',' << (i >= rep.tail_start ? 1 : 0) << '\n';
        }
    }
    return verdict_exit(rep.verdict);
}

inline std::vector<std::size_t> q_schedule_from(const Json& cfg) {
    if (cfg.contains("q_schedule")) return cfg.at("q_schedule").get<std::vector<std::size_t>>();
    const auto m_max = cfg.value("m_max", std::size_t{5});
    std::vector<std::size_t> q;
    for (std::size_t m = 1; m <= m_max; ++m) q.push_back(m + 1);  // q(m) = m + 1
    return q;
}

inline int cmd_theorem2(const std::string& config_path, const std::string& json_path, const std::string& csv_path,
                        const Limits& limits, std::ostream& out, std::ostream& err) {
    const Json cfg = load_config(config_path);
    const Resolver res{std::filesystem::path(config_path).parent_path(), limits};
    const auto spec = family_from_config(cfg, res);
    const auto q = q_schedule_from(cfg);
    const auto rep = theorem2_experiment(spec.family, q, spec.options);
    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';

    Json rows = Json::array();
    for (const auto& row : rep.rows) {
        Json br = Json::array();
        for (std::size_t i = 0; i < row.brackets.size(); ++i)
            br.push_back({{"n", rep.approximant_index[i]}, {"bracket", bracket_json(row.brackets[i])}});
        rows.push_back({{"m", row.m},
                        {"q", row.q},
                        {"brackets", br},
                        {"tail_max", {{"lower", row.tail_max_lower}, {"upper", row.tail_max_upper}}}});
    }
    Json hyps = Json::array();
    for (const auto& h : rep.hypotheses) hyps.push_back(hypothesis_json(h));
    Json doc = {{"experiment", "theorem2"},
                {"target_rate", bracket_json(rep.target_rate)},
                {"q_schedule", q},
                {"bracket_depth", spec.options.bracket_depth},
                {"rows", rows},
                {"hypotheses", hyps},
                {"limsup_rendering", "max over family positions >= tail_start"},
                {"tail_start_n", rep.approximant_index[rep.tail_start]},
                {"rhs_lower", rep.rhs_lower},
                {"tolerance", spec.options.tolerance},
                {"warnings", rep.warnings},
                {"verdict", to_string(rep.verdict)}};
    {
        Sink sink(json_path, out);
        *sink << doc.dump(2) << '\n';
    }
    const std::string csv = !csv_path.empty() ? csv_path : (cfg.contains("csv_out") ? res.path(cfg.at("csv_out")) : "");
    if (!csv.empty()) {
        Sink sink(csv, out);
        *sink << "m,q,n,lower,upper,in_tail\n";
        for (const auto& row : rep.rows)
            for (std::size_t i = 0; i < row.brackets.size(); ++i)
                *sink << row.m << ',' << row.q << ',' << rep.approximant_index[i] << ','
                      << num(row.brackets[i].lower.nats) << ',' << num(row.brackets[i].upper.nats) << ','
                      << (i >= rep.tail_start ? 1 : 0) << '\n';
    }
    return verdict_exit(rep.verdict);
}

inline std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
    const auto dots = s.find("..");
    require(dots != std::string::npos, "sweep range must look like a..b");
    try {
        return {std::stoul(s.substr(0, dots)), std::stoul(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw InvalidInput("malformed sweep range " + s);
    }
}

inline int cmd_pitskel(std::size_t K, std::size_t W, std::size_t n, const std::string& sweep,
                       const std::string& policy, const std::string& out_path, const Limits& limits,
                       std::ostream& out) {
    require(policy == "merge_tail" || policy == "renormalize", "unknown tail policy " + policy);
    auto [lo, hi] = sweep.empty() ? std::pair{K, K} : parse_range(sweep);
    const auto rep = pitskel::counterexample_sweep(
        lo, hi, W, n, policy == "merge_tail" ? TailPolicy::MergeTail : TailPolicy::Renormalize, limits);
    Sink sink(out_path, out);
    *sink << "K,n,h_mu,h_hull_n,gap\n";
    for (const auto& r : rep.rows)
        *sink << r.K << ',' << r.n << ',' << num(r.h_mu) << ',' << num(r.h_hull) << ',' << num(r.gap) << '\n';
    *sink << "# marginal matching checks: " << rep.marginal_checks;
    if (rep.marginal_checks > 0) *sink << ", max error " << num(rep.max_marginal_error);
    *sink << '\n';
    *sink << "# divergence trend: " << (rep.divergence_trend() ? "confirmed" : "refuted")
          << " (h_mu bounded by 2 ln 2: " << (rep.base_rate_bounded ? "yes" : "no")
          << "; hull rate increasing in K: " << (rep.hull_rate_increasing ? "yes" : "no")
          << "; gap increasing in K: " << (rep.gap_increasing ? "yes" : "no")
          << "; hull rate >= h_mu: " << (rep.hull_dominates ? "yes" : "no") << ")\n";
    return rep.divergence_trend() ? kExitOk : kExitViolated;
}

inline int cmd_suspension(const std::string& config_path, const std::string& out_path, const Limits& limits,
                          std::ostream& out) {
    const Json cfg = load_config(config_path);
    const Resolver res{std::filesystem::path(config_path).parent_path(), limits};
    const auto sys = res.suspension(cfg);
    const auto q = q_schedule_from(cfg);
    const auto n_max = cfg.value("n_max", std::size_t{6});
    const auto depth = cfg.value("bracket_depth", n_max);
    require(n_max >= 1, "n_max must be at least 1");

    std::vector<MarkovHull> hulls;
    for (std::size_t n = 1; n <= n_max; ++n) hulls.push_back(markov_hull(sys.measure, n, "tower", limits));

    Sink sink(out_path, out);
    *sink << "m,q,n,lower,upper,hull_rate\n";
    for (std::size_t m = 0; m < q.size(); ++m) {
        const auto part = truncated_partition(sys.tower_size(), q[m]);
        for (std::size_t n = 1; n <= n_max; ++n) {
            const auto b = factor_entropy_bracket(hulls[n - 1].hull, part, depth, limits);
            *sink << m + 1 << ',' << q[m] << ',' << n << ',' << num(b.lower.nats) << ',' << num(b.upper.nats) << ','
                  << num(hull_entropy_rate(hulls[n - 1]).nats) << '\n';
        }
    }
    const auto tower = factor_entropy_bracket(sys.measure, truncated_partition(sys.tower_size(), sys.tower_size()),
                                              cfg.value("abramov_depth", std::size_t{8}), limits);
    *sink << "# tower alphabet " << sys.tower_size() << ", mean ceiling " << num(sys.mean_ceiling) << '\n';
    *sink << "# abramov rate " << num(abramov_rate(sys)) << ", tower bracket [" << num(tower.lower.nats) << ", "
          << num(tower.upper.nats) << "]\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entropy of stationary shift measures, Markov hulls and their counterexamples", "ksent"};
    app.require_subcommand(1);

    std::string measure, out_path, config, json_out, csv_out, save_path, sweep, policy = "merge_tail";
    std::size_t n_max = 4, order = 1, trials = 10000, max_atoms = 64, K = 4, W = 8, n = 2;
    std::uint64_t seed = 0;

    auto* entropy = app.add_subcommand("entropy", "block and conditional entropies (CSV)");
    entropy->add_option("--measure", measure, "measure document")->required();
    entropy->add_option("--n-max", n_max, "largest block length")->required();
    entropy->add_option("--out", out_path, "output file (default stdout)");

    auto* hull = app.add_subcommand("hull", "n-Markov hull kernel and entropy table");
    hull->add_option("--measure", measure, "measure document")->required();
    hull->add_option("--order", order, "hull order n")->required();
    hull->add_option("--out", out_path, "output file (default stdout)");
    hull->add_option("--save-hull", save_path, "write the hull as a measure document");

    auto* fuzz = app.add_subcommand("lemma-fuzz", "randomized check of the entropy perturbation bound");
    fuzz->add_option("--trials", trials, "accepted triples")->required();
    fuzz->add_option("--seed", seed, "seed")->required();
    fuzz->add_option("--max-atoms", max_atoms, "largest support size");
    fuzz->add_option("--out", out_path, "output file (default stdout)");

    auto* t1 = app.add_subcommand("theorem1", "lower estimate of h_mu by approximant entropies");
    t1->add_option("--config", config, "experiment config")->required();
    t1->add_option("--json-out", json_out, "verdict JSON file (default stdout)");
    t1->add_option("--csv-out", csv_out, "trace CSV file");

    auto* t2 = app.add_subcommand("theorem2", "double-limsup estimate through truncated partitions");
    t2->add_option("--config", config, "experiment config")->required();
    t2->add_option("--json-out", json_out, "verdict JSON file (default stdout)");
    t2->add_option("--csv-out", csv_out, "trace CSV file");

    auto* pit = app.add_subcommand("pitskel", "conditional entropies of the refined Bernoulli partition");
    pit->add_option("--K", K, "alphabet cutoff");
    pit->add_option("--W", W, "window cap (0 = no cap)");
    pit->add_option("--n", n, "largest memory n");
    pit->add_option("--sweep", sweep, "K range a..b");
    pit->add_option("--policy", policy, "tail policy: merge_tail | renormalize");
    pit->add_option("--out", out_path, "output file (default stdout)");

    auto* susp = app.add_subcommand("suspension", "tower measure, truncated factors and hull rates");
    susp->add_option("--config", config, "suspension config")->required();
    susp->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInputError;
    }

    try {
        const Limits limits = limits_from_env();
        if (entropy->parsed()) return cmd_entropy(measure, n_max, out_path, limits, out);
        if (hull->parsed()) return cmd_hull(measure, order, out_path, save_path, limits, out);
        if (fuzz->parsed()) return cmd_lemma_fuzz(trials, seed, max_atoms, out_path, out);
        if (t1->parsed()) return cmd_theorem1(config, json_out, csv_out, limits, out, err);
        if (t2->parsed()) return cmd_theorem2(config, json_out, csv_out, limits, out, err);
        if (pit->parsed()) return cmd_pitskel(K, W, n, sweep, policy, out_path, limits, out);
        if (susp->parsed()) return cmd_suspension(config, out_path, limits, out);
    } catch (const BudgetExceeded& e) {
        err << "error: enumeration budget exceeded (" << kBudgetEnv << "): " << e.what() << '\n';
        return kExitInputError;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace ksent::cli

#endif
