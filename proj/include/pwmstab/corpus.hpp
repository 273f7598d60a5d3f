#pragma once

#include <string>
#include <vector>

#include "pwmstab/config.hpp"

namespace pwmstab {

struct CorpusEntry {
    std::string name;
    RunConfig config;
};

/// Desk-scale configurations exercised by `verify` and the test suites:
/// ideal buck, buck with parasitics, ideal boost, boost with parasitics,
/// each with and without a compensating ramp. All have valid period-1 orbits.
std::vector<CorpusEntry> verification_corpus();

/// Three stable configurations with well-separated spectral radii
/// (about 0.40, 0.58, 0.69) for contraction-rate cross-checks.
std::vector<CorpusEntry> contraction_trio();

/// Light-RC buck where e^{T/(RC)} is far from 1: the classical slope
/// criterion rejects it (ratio > 1) while the exact eigenvalue test says
/// stable.
CorpusEntry gap_demo();

/// Small-ripple buck whose no-ramp flip boundary sits at duty 0.5 up to a
/// tiny damping shift; the current command is the natural sweep handle.
CorpusEntry flip_anchor(double i_c = 0.5);

} // namespace pwmstab
