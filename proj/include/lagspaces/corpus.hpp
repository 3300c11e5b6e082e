#pragma once

// The pinned random-field corpus and the run configuration. Everything that
// feeds a reproducibility claim lives here: seeds, shells, entry ranges.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lagspaces/spectral.hpp"

namespace lagspaces::corpus {

struct CorpusSpec {
    std::uint64_t seed = 20240901;
    int fields = 50;
    std::vector<double> alpha{0.5};
    int K = 20;
    int entries = 20;
};

/// Deterministic corpus: per field, `entries` distinct indices |k| <= K and
/// coefficients sign * mag * (1+|k|)^{-2} with mag in [0.25, 1). The decay
/// keeps the fields essentially supported below the spatial truncation used
/// by the cube family.
inline std::vector<spectral::CoeffField> standard_corpus(const CorpusSpec& spec) {
    AlphaIndex alpha(spec.alpha);
    int d = alpha.dim();
    auto ks = multi_indices_up_to(d, spec.K);
    std::vector<spectral::CoeffField> out;
    out.reserve(static_cast<size_t>(spec.fields));
    for (int i = 0; i < spec.fields; ++i) {
        SplitMix64 rng(spec.seed + 1000003ULL * static_cast<std::uint64_t>(i));
        spectral::CoeffField f(alpha, d);
        int placed = 0;
        while (placed < spec.entries && placed < static_cast<int>(ks.size())) {
            const auto& k = ks[static_cast<size_t>(rng.below(ks.size()))];
            if (f.coefficient(k) != 0.0) continue;
            double mag = rng.uniform(0.25, 1.0);
            double sign = (rng.next() & 1u) ? 1.0 : -1.0;
            f.set(k, sign * mag / lagspaces::sq(1.0 + k.length()));
            ++placed;
        }
        out.push_back(std::move(f));
    }
    return out;
}

struct GridSpec {
    double x_max = 12.0;
    int nodes_per_panel = 16;
    int nu_min = -12;
    int nu_max = 6;
    int nodes_per_octave = 16;
};

struct Config {
    std::vector<std::string> suites;
    std::vector<double> alpha{0.5};
    int d = 1;
    int K = 20;
    GridSpec grids;
    std::uint64_t corpus_seed = 20240901;
    int corpus_fields = 50;
    int corpus_entries = 20;
    std::map<std::string, double> tolerances;
    std::string out_dir = ".";

    CorpusSpec corpus_spec() const {
        CorpusSpec s;
        s.seed = corpus_seed;
        s.fields = corpus_fields;
        s.alpha = alpha;
        s.K = K;
        s.entries = corpus_entries;
        return s;
    }

    double tolerance(const std::string& name, double fallback) const {
        auto it = tolerances.find(name);
        return it == tolerances.end() ? fallback : it->second;
    }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"suites", suites},
            {"alpha", alpha},
            {"d", d},
            {"K", K},
            {"grids",
             {{"x_max", grids.x_max},
              {"nodes_per_panel", grids.nodes_per_panel},
              {"nu_min", grids.nu_min},
              {"nu_max", grids.nu_max},
              {"nodes_per_octave", grids.nodes_per_octave}}},
            {"corpus_seed", corpus_seed},
            {"corpus", {{"fields", corpus_fields}, {"entries", corpus_entries}}},
            {"tolerances", tolerances},
            {"out_dir", out_dir}};
    }

    static Config from_json(const nlohmann::json& j) {
        Config c;
        if (j.contains("suites")) c.suites = j.at("suites").get<std::vector<std::string>>();
        if (j.contains("alpha")) c.alpha = j.at("alpha").get<std::vector<double>>();
        if (j.contains("d")) c.d = j.at("d").get<int>();
        if (j.contains("K")) c.K = j.at("K").get<int>();
        if (j.contains("grids")) {
            const auto& g = j.at("grids");
            if (g.contains("x_max")) c.grids.x_max = g.at("x_max").get<double>();
            if (g.contains("nodes_per_panel"))
                c.grids.nodes_per_panel = g.at("nodes_per_panel").get<int>();
            if (g.contains("nu_min")) c.grids.nu_min = g.at("nu_min").get<int>();
            if (g.contains("nu_max")) c.grids.nu_max = g.at("nu_max").get<int>();
            if (g.contains("nodes_per_octave"))
                c.grids.nodes_per_octave = g.at("nodes_per_octave").get<int>();
        }
        if (j.contains("corpus_seed")) c.corpus_seed = j.at("corpus_seed").get<std::uint64_t>();
        if (j.contains("corpus")) {
            const auto& cj = j.at("corpus");
            if (cj.contains("fields")) c.corpus_fields = cj.at("fields").get<int>();
            if (cj.contains("entries")) c.corpus_entries = cj.at("entries").get<int>();
        }
        if (j.contains("tolerances"))
            c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
        c.validate();
        return c;
    }

    void validate() const {
        if (d < 1 || d > 3) throw std::invalid_argument("config: d must be 1, 2 or 3");
        if (static_cast<int>(alpha.size()) != d)
            throw std::invalid_argument("config: alpha must have d components");
        for (double a : alpha)
            if (!(a > -1.0)) throw std::invalid_argument("config: alpha components must exceed -1");
        if (K < 0 || K > 500) throw std::invalid_argument("config: K out of range");
        if (corpus_fields < 1 || corpus_entries < 1)
            throw std::invalid_argument("config: corpus sizes must be positive");
        if (!(grids.x_max > 0.0) || grids.nodes_per_panel < 2 || grids.nodes_per_octave < 2 ||
            grids.nu_min >= grids.nu_max)
            throw std::invalid_argument("config: malformed grid spec");
    }
};

}  // namespace lagspaces::corpus
