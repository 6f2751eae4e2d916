#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace imbed {

struct SelftestCheck {
    int instance = 0;
    int dim = 0;
    std::string check;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Runs the operator identities and the imbedding bootstrap on `cases` random
/// operators (dim 1..max_dim, entries 0.5·unit disc) drawn from SplitMix64(seed).
std::vector<SelftestCheck> run_selftest(std::uint64_t seed, int cases = 50, int max_dim = 8);

/// instance,dim,check,error,tolerance,pass
void write_selftest_csv(std::ostream& out, const std::vector<SelftestCheck>& checks);

} // namespace imbed
