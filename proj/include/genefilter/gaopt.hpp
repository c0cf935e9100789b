#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genefilter/fgf.hpp"

namespace genefilter::gaopt {

struct GaConfig {
    int population_size = 50;
    int generations = 100;
    int tournament_size = 3;
    double crossover_rate = 0.8;
    double mutation_sigma = 0.05;
    double mutation_rate = 0.1;
    int elites = 2;
    Index top_n_genes = 20;
    std::uint64_t seed = 42;

    // gene_count < 0 skips the top_n_genes bound.
    void validate(Index gene_count = -1) const;
};

// Best fitness seen so far, recorded after the initial population (entry 0)
// and after every generation.
struct GaTrace {
    std::vector<double> best_fitness;
    std::vector<fgf::FgfParams> best_params;
};

struct GaResult {
    fgf::FgfParams params;
    GaTrace trace;
};

// Trace ratio of between- to within-class scatter over the given genes, after
// standardizing each selected gene across samples.
double separability_index(const Dataset& dataset, std::span<const Index> genes);
double separability_index(const Dataset& dataset, const GeneRanking& ranking, Index top_n);

// Clamp to [0.01, 0.99] and restore alpha < beta for each (alpha, beta) pair.
std::array<double, 6> repair(std::array<double, 6> chromosome);

GaResult optimize_fgf(const Dataset& dataset, const GaConfig& config);

// "generation<TAB>best_fitness" rows with a header line.
std::string format_trace_tsv(const GaTrace& trace);

} // namespace genefilter::gaopt
