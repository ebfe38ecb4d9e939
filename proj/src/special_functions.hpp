// Copyright 2026 the spc-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace spc {

// Regularized incomplete beta I_x(a, b). Continued fraction with the
// symmetry switch at x > (a+1)/(a+b+2). Throws std::domain_error for
// x outside [0,1] or nonpositive a, b.
double reg_inc_beta(double x, double a, double b);

// Regularized lower incomplete gamma P(s, x); series for x < s+1,
// continued fraction otherwise.
double reg_lower_gamma(double s, double x);

// Chi-square CDF/quantile with integer degrees of freedom.
double chi2_cdf(double x, int df);
double chi2_pdf(double x, int df);
// Inverts chi2_cdf to |cdf(x) - p| <= 1e-12 by a safeguarded
// bisection-Newton hybrid (200-iteration cap).
double chi2_quantile(double p, int df);

// Standard normal CDF/PDF/quantile; the quantile is the same guarded
// inversion of normal_cdf and round-trips to better than 1e-10.
double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

}  // namespace spc
