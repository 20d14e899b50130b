#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gammalab {

// Randomized invariant suite over a corpus of piecewise-linear functions: kernel
// symmetries (u -> -u, u + c, spatial reflection), domain monotonicity, additivity
// lower bound, and determinism across thread counts.
struct InvariantReport {
    int functions = 0;
    int checks = 0;
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

InvariantReport run_invariant_corpus(int count, std::uint64_t seed, std::ostream* log = nullptr);

} // namespace gammalab
