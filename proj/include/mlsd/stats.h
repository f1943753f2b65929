// include/mlsd/stats.h

// Copyright 2026  The MLSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MLSD_STATS_H_
#define MLSD_STATS_H_

#include <span>

namespace mlsd {

/// I_x(a, b) by Lentz's continued fraction, accurate to ~1e-14.
double regularized_incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
  double t = 0;
  double p = 1;
  double df = 0;
  double mean_difference = 0;
  /// All differences equal and non-zero: t is infinite and p is 0.
  bool zero_variance = false;
};

/// Two-sided paired t-test on a[i] - b[i].  Identical samples give t = 0,
/// p = 1.  Throws when the lengths differ or are below 2.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_stddev(std::span<const double> xs);

}  // namespace mlsd

#endif  // MLSD_STATS_H_
