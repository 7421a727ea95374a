#pragma once

#include <string>
#include <vector>

namespace mrs {

// Parameter shape of a generalized hypergeometric count family. A family
// with upper parameters a_1..a_p and lower parameters b_1..b_q and a scalar
// parameter theta has probability generating function
//
//     G(s) = pFq[a_1..a_p; b_1..b_q; theta * (s - 1)],
//
// so the r-th factorial moment is E((X)_r) = theta^r * prod<a_i>^r / prod<b_k>^r.
// That is what makes the moments-ratio machinery exact: E((X)_r) is always
// the family constant cmr_coefficient(r) times E(X)^r.
struct GhdFamily {
    std::vector<double> upper;
    std::vector<double> lower;
    std::string label;

    static GhdFamily poisson();
    static GhdFamily hyper_poisson(double b);
    static GhdFamily negative_binomial(double k);
    // Binomial(N, p) is upper = {-N} with model parameter theta = -p, so the
    // generic pgf (1 - (-p)(s-1))^N = (1 - p + p s)^N is the standard
    // binomial one and the series terminates after N + 1 terms.
    static GhdFamily binomial(int trials);

    // True when some upper parameter is a nonpositive integer, which zeroes
    // every series term beyond it.
    bool terminating() const;
    // Number of nonzero series terms for a terminating family (N + 1 for
    // binomial(N)).
    int termination_terms() const;

    // Rejects lower parameters that are zero or negative integers (they zero
    // a series denominator).
    void validate() const;

    bool operator==(const GhdFamily& other) const {
        return upper == other.upper && lower == other.lower;
    }
};

// The r-th factorial moments ratio of a family: E((X)_r) = coefficient * E(X)^r.
struct CmrSpec {
    GhdFamily family;
    int order = 2;       // r >= 2
    double coefficient = 1.0;

    static CmrSpec make(const GhdFamily& family, int r);
};

// a(a+1)...(a+j-1); 1 when j == 0.
double rising_factorial(double a, int j);

// a(a-1)...(a-j+1); 1 when j == 0.
double falling_factorial(double a, int j);

// Signed Stirling numbers of the first kind, the coefficients in
// (x)_r = sum_k s(r,k) x^k. Rows are cached; r is capped at 20 so the
// values stay inside 64-bit integers.
long long stirling_first(int r, int k);
const std::vector<long long>& stirling_first_row(int r);

// x^n by repeated multiplication (deterministic across platforms, exact for
// integer-valued x in range).
double pow_int(double x, int n);

struct PfqOptions {
    double tolerance = 1e-12;  // relative term size that stops the sum
    int max_terms = 10000;
};

// The raw generalized hypergeometric series
//     sum_j <a_1>^j ... <a_p>^j z^j / (<b_1>^j ... <b_q>^j j!),
// summed exactly when it terminates and otherwise truncated when the
// absolute term drops below tolerance * |partial sum|. Throws
// DivergenceError when max_terms is hit first. terms_used, when given,
// receives the number of terms summed.
double pfq(const GhdFamily& family, double z, const PfqOptions& opts = {},
           int* terms_used = nullptr);

// pmf of the distribution with pgf pFq[a; b; theta(s-1)], computed by the
// factorial-moment inversion pmf(x) = sum_{j>=x} (-1)^(j-x) C(j,x) t_j(theta)
// where t_j is the j-th series term. Throws NegativeMassError when a
// coefficient is materially negative (theta sign misuse) and DivergenceError
// when the tail does not settle.
double ghd_pmf(const GhdFamily& family, double theta, long long x);

// The constant c_r with E((X)_r | parents) = c_r * E(X | parents)^r:
//     prod_i (a_i + r - 1)_r / a_i^r  *  prod_k b_k^r / (b_k + r - 1)_r.
// Throws SingularParameterError when a denominator factor vanishes.
double cmr_coefficient(const GhdFamily& family, int r);

// coefficient * x^r.
double cmr_function(const CmrSpec& spec, double x);

}  // namespace mrs
