#pragma once

// Independent reference computations for the statistics module. Nothing
// here calls into the library.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// Pearson statistic evaluated cell by cell, (O - E)^2 / E over the
// groups x {present, absent} table, in extended precision.
inline long double pearson(const std::vector<std::uint64_t>& sizes,
                           const std::vector<std::uint64_t>& present) {
  long double total = 0, with_term = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    total += static_cast<long double>(sizes[g]);
    with_term += static_cast<long double>(present[g]);
  }
  const long double without = total - with_term;
  long double chi2 = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const long double n = static_cast<long double>(sizes[g]);
    const long double o1 = static_cast<long double>(present[g]);
    const long double o0 = n - o1;
    const long double e1 = n * with_term / total;
    const long double e0 = n * without / total;
    if (e1 > 0) chi2 += (o1 - e1) * (o1 - e1) / e1;
    if (e0 > 0) chi2 += (o0 - e0) * (o0 - e0) / e0;
  }
  return chi2;
}

// Values computed once with an external statistics package and frozen.
inline constexpr double kChi2_10_20_40 = 26.086956521739133;   // N=(100,100,100)
inline constexpr double kChi2_10_20_50 = 33.390410958904106;   // N=(1000,1000,1000)
inline constexpr double kChi2_small = 0.1388888888888888;      // N=(2,3), k=(1,2)
inline constexpr double kIsf_05_df2 = 5.991464547107983;
inline constexpr double kIsf_5e8_df2 = 33.62248566303653;
inline constexpr double kSf_10_df3 = 0.01856613546304325;
inline constexpr double kSf_5_df1 = 0.025347318677468325;
inline constexpr double kIsf_5e5_df3 = 22.55474907051492;      // 0.05 / 1000
inline constexpr double kIsf_01_df1 = 6.634896601021217;

}  // namespace oracle
