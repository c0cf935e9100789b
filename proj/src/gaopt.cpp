#include "genefilter/gaopt.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "genefilter/textio.hpp"

namespace genefilter::gaopt {

namespace {

constexpr double kGeneMin = 0.01;
constexpr double kGeneMax = 0.99;

using Chromosome = std::array<double, 6>;

// Scatter traces over rows of an already standardized matrix.
double trace_ratio(const Matrix& standardized, std::span<const Index> rows, const std::vector<int>& labels) {
    const Index n = standardized.cols();
    std::array<double, 2> class_n{0.0, 0.0};
    for (int label : labels) class_n[static_cast<std::size_t>(label)] += 1.0;

    double between = 0.0;
    double within = 0.0;
    for (Index g : rows) {
        std::array<double, 2> sum{0.0, 0.0};
        double total = 0.0;
        for (Index j = 0; j < n; ++j) {
            const double v = standardized(g, j);
            sum[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] += v;
            total += v;
        }
        const double grand = total / static_cast<double>(n);
        const std::array<double, 2> mean{sum[0] / class_n[0], sum[1] / class_n[1]};
        for (std::size_t c = 0; c < 2; ++c) between += class_n[c] * (mean[c] - grand) * (mean[c] - grand);
        for (Index j = 0; j < n; ++j) {
            const double d = standardized(g, j) - mean[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])];
            within += d * d;
        }
    }
    return between / (within + kVarianceFloor);
}

std::vector<Index> canonical_genes(std::span<const Index> genes, Index gene_count) {
    std::vector<Index> sorted(genes.begin(), genes.end());
    std::sort(sorted.begin(), sorted.end());
    for (Index g : sorted) {
        if (g < 0 || g >= gene_count) throw InvalidInput("separability_index: gene index out of range");
    }
    return sorted;
}

class Fitness {
public:
    Fitness(const Dataset& dataset, Index top_n)
        : ranker_(dataset), standardized_(dataio::standardize_genes(dataset.matrix)), labels_(dataset.labels),
          top_n_(top_n) {}

    double operator()(const Chromosome& chromosome) const {
        const GeneRanking ranking = ranker_.rank(fgf::FgfParams::from_array(chromosome));
        const std::vector<Index> genes = canonical_genes(ranking.top(top_n_), standardized_.rows());
        return trace_ratio(standardized_, genes, labels_);
    }

private:
    fgf::FgfRanker ranker_;
    Matrix standardized_;
    std::vector<int> labels_;
    Index top_n_;
};

} // namespace

void GaConfig::validate(Index gene_count) const {
    if (population_size < 2) throw InvalidInput("ga config: population_size must be at least 2");
    if (generations < 0) throw InvalidInput("ga config: generations must be non-negative");
    if (tournament_size < 1) throw InvalidInput("ga config: tournament_size must be at least 1");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw InvalidInput("ga config: crossover_rate outside [0, 1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw InvalidInput("ga config: mutation_rate outside [0, 1]");
    if (!(mutation_sigma > 0.0)) throw InvalidInput("ga config: mutation_sigma must be positive");
    if (elites < 1 || elites >= population_size) throw InvalidInput("ga config: need 1 <= elites < population_size");
    if (top_n_genes < 2) throw InvalidInput("ga config: top_n_genes must be at least 2");
    if (gene_count >= 0 && top_n_genes > gene_count)
        throw InvalidInput("ga config: top_n_genes " + std::to_string(top_n_genes) + " exceeds gene count " +
                           std::to_string(gene_count));
}

double separability_index(const Dataset& dataset, std::span<const Index> genes) {
    if (dataset.class_size(0) < 2 || dataset.class_size(1) < 2)
        throw InvalidInput("separability_index: each class needs at least 2 samples");
    const std::vector<Index> rows = canonical_genes(genes, dataset.gene_count());
    Matrix selected(static_cast<Index>(rows.size()), dataset.sample_count());
    for (std::size_t i = 0; i < rows.size(); ++i) selected.row(static_cast<Index>(i)) = dataset.matrix.row(rows[i]);
    const Matrix standardized = dataio::standardize_genes(selected);
    std::vector<Index> all(rows.size());
    std::iota(all.begin(), all.end(), Index{0});
    return trace_ratio(standardized, all, dataset.labels);
}

double separability_index(const Dataset& dataset, const GeneRanking& ranking, Index top_n) {
    if (top_n < 1 || top_n > dataset.gene_count())
        throw InvalidInput("separability_index: top_n " + std::to_string(top_n) + " outside [1, " +
                           std::to_string(dataset.gene_count()) + "]");
    return separability_index(dataset, ranking.top(top_n));
}

Chromosome repair(Chromosome chromosome) {
    for (double& v : chromosome) v = std::clamp(v, kGeneMin, kGeneMax);
    for (std::size_t p = 0; p < 6; p += 2) {
        double& alpha = chromosome[p];
        double& beta = chromosome[p + 1];
        if (alpha >= beta) std::swap(alpha, beta);
        if (alpha >= beta) beta = std::min(kGeneMax, alpha + 0.01);
        if (alpha >= beta) alpha = beta - 0.01;
    }
    return chromosome;
}

GaResult optimize_fgf(const Dataset& dataset, const GaConfig& config) {
    dataset.validate();
    config.validate(dataset.gene_count());

    const Fitness fitness(dataset, config.top_n_genes);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> init_alpha(0.01, 0.49);
    std::uniform_real_distribution<double> init_beta(0.51, 0.99);
    std::normal_distribution<double> noise(0.0, config.mutation_sigma);
    std::uniform_int_distribution<int> pick(0, config.population_size - 1);

    const auto pop_size = static_cast<std::size_t>(config.population_size);
    std::vector<Chromosome> population(pop_size);
    for (auto& chromosome : population) {
        for (std::size_t p = 0; p < 6; p += 2) {
            chromosome[p] = init_alpha(rng);
            chromosome[p + 1] = init_beta(rng);
        }
        chromosome = repair(chromosome);
    }
    std::vector<double> scores(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) scores[i] = fitness(population[i]);

    Chromosome best = population[0];
    double best_score = -1.0;
    GaTrace trace;
    auto record = [&] {
        for (std::size_t i = 0; i < pop_size; ++i) {
            if (scores[i] > best_score) {
                best_score = scores[i];
                best = population[i];
            }
        }
        trace.best_fitness.push_back(best_score);
        trace.best_params.push_back(fgf::FgfParams::from_array(best));
    };
    record();

    auto tournament = [&] {
        std::size_t winner = static_cast<std::size_t>(pick(rng));
        for (int t = 1; t < config.tournament_size; ++t) {
            const auto challenger = static_cast<std::size_t>(pick(rng));
            if (scores[challenger] > scores[winner] || (scores[challenger] == scores[winner] && challenger < winner))
                winner = challenger;
        }
        return winner;
    };
    auto mutate = [&](Chromosome& c) {
        for (double& v : c) {
            if (unit(rng) < config.mutation_rate) v += noise(rng);
        }
    };

    std::vector<std::size_t> by_fitness(pop_size);
    for (int generation = 1; generation <= config.generations; ++generation) {
        std::iota(by_fitness.begin(), by_fitness.end(), std::size_t{0});
        std::stable_sort(by_fitness.begin(), by_fitness.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

        std::vector<Chromosome> next;
        std::vector<double> next_scores;
        next.reserve(pop_size);
        for (int e = 0; e < config.elites; ++e) {
            next.push_back(population[by_fitness[static_cast<std::size_t>(e)]]);
            next_scores.push_back(scores[by_fitness[static_cast<std::size_t>(e)]]);
        }
        const std::size_t n_elites = next.size();
        while (next.size() < pop_size) {
            Chromosome a = population[tournament()];
            Chromosome b = population[tournament()];
            if (unit(rng) < config.crossover_rate) {
                for (std::size_t k = 0; k < a.size(); ++k) {
                    if (unit(rng) < 0.5) std::swap(a[k], b[k]);
                }
            }
            mutate(a);
            mutate(b);
            next.push_back(repair(a));
            if (next.size() < pop_size) next.push_back(repair(b));
        }
        // Offspring evaluation draws no randomness, so it may be reordered freely.
        next_scores.resize(pop_size);
        for (std::size_t i = n_elites; i < pop_size; ++i) next_scores[i] = fitness(next[i]);

        population = std::move(next);
        scores = std::move(next_scores);
        record();
    }

    return GaResult{fgf::FgfParams::from_array(best), std::move(trace)};
}

std::string format_trace_tsv(const GaTrace& trace) {
    std::string out = "generation\tbest_fitness\n";
    for (std::size_t g = 0; g < trace.best_fitness.size(); ++g) {
        out += std::to_string(g);
        out += '\t';
        out += textio::format_double(trace.best_fitness[g]);
        out += '\n';
    }
    return out;
}

} // namespace genefilter::gaopt
