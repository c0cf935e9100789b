#pragma once

#include <cstdint>
#include <vector>

#include "genefilter/classifiers.hpp"
#include "genefilter/dataio.hpp"

namespace genefilter::testing {

// Gaussian expression (mean `baseline`, sd `sd`) with `planted` genes whose
// class-1 mean is shifted by `shift` standard deviations. Planted genes sit
// at random rows and alternate the sign of the shift.
struct PlantedSpec {
    Index genes = 1000;
    Index per_class = 20;
    Index planted = 20;
    double shift = 2.0;
    double baseline = 10.0;
    double sd = 1.0;
    std::uint64_t seed = 1;
};

struct PlantedData {
    Dataset dataset;
    std::vector<Index> planted;  // ascending
};

PlantedData make_planted(const PlantedSpec& spec);

// Two isotropic Gaussian blobs in `dims` dimensions with centres at -gap/2
// and +gap/2 along every axis.
classifiers::TrainSet make_blobs(Index per_class, Index dims, double gap, std::uint64_t seed);

// Number of entries of `planted` that appear among the first `n` of `order`.
Index count_hits(const std::vector<Index>& order, const std::vector<Index>& planted, Index n);

} // namespace genefilter::testing
