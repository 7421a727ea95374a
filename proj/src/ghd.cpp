#include "mrs/ghd.hpp"

#include <cmath>
#include <cstdio>

#include "mrs/errors.hpp"

namespace mrs {

namespace {

bool is_nonpositive_integer(double a) {
    return a <= 0.0 && std::abs(a - std::round(a)) < 1e-9;
}

std::string family_name(const GhdFamily& f) {
    return f.label.empty() ? std::string("ghd") : f.label;
}

}  // namespace

GhdFamily GhdFamily::poisson() { return {{}, {}, "poisson"}; }

GhdFamily GhdFamily::hyper_poisson(double b) {
    GhdFamily f{{1.0}, {b}, "hyper-poisson"};
    f.validate();
    return f;
}

GhdFamily GhdFamily::negative_binomial(double k) {
    return {{k}, {}, "negative-binomial"};
}

GhdFamily GhdFamily::binomial(int trials) {
    if (trials < 1) throw std::invalid_argument("binomial: trials must be >= 1");
    return {{-static_cast<double>(trials)}, {}, "binomial"};
}

bool GhdFamily::terminating() const {
    for (double a : upper)
        if (is_nonpositive_integer(a)) return true;
    return false;
}

int GhdFamily::termination_terms() const {
    int best = -1;
    for (double a : upper) {
        if (!is_nonpositive_integer(a)) continue;
        const int terms = static_cast<int>(std::llround(-a)) + 1;
        if (best < 0 || terms < best) best = terms;
    }
    return best;
}

void GhdFamily::validate() const {
    for (double b : lower) {
        if (is_nonpositive_integer(b)) {
            throw std::invalid_argument(family_name(*this) +
                                        ": lower parameter is zero or a nonpositive integer");
        }
    }
}

CmrSpec CmrSpec::make(const GhdFamily& family, int r) {
    if (r < 2) throw std::invalid_argument("CmrSpec: order must be >= 2");
    return {family, r, cmr_coefficient(family, r)};
}

double rising_factorial(double a, int j) {
    if (j < 0) throw std::invalid_argument("rising_factorial: j must be >= 0");
    double out = 1.0;
    for (int i = 0; i < j; ++i) out *= a + i;
    return out;
}

double falling_factorial(double a, int j) {
    if (j < 0) throw std::invalid_argument("falling_factorial: j must be >= 0");
    double out = 1.0;
    for (int i = 0; i < j; ++i) out *= a - i;
    return out;
}

namespace {

constexpr int kMaxStirlingRow = 20;

// Rows of signed Stirling numbers of the first kind, built once via
// s(r+1, k) = s(r, k-1) - r * s(r, k).
const std::vector<std::vector<long long>>& stirling_table() {
    static std::vector<std::vector<long long>> table = [] {
        std::vector<std::vector<long long>> t(kMaxStirlingRow + 1);
        t[0] = {1};
        for (int r = 1; r <= kMaxStirlingRow; ++r) {
            t[r].assign(r + 1, 0);
            for (int k = 1; k <= r; ++k) {
                const long long prev_k1 = t[r - 1][k - 1];
                const long long prev_k = (k <= r - 1) ? t[r - 1][k] : 0;
                t[r][k] = prev_k1 - static_cast<long long>(r - 1) * prev_k;
            }
        }
        return t;
    }();
    return table;
}

}  // namespace

const std::vector<long long>& stirling_first_row(int r) {
    if (r < 0 || r > kMaxStirlingRow)
        throw std::invalid_argument("stirling_first: r out of supported range [0, 20]");
    return stirling_table()[r];
}

long long stirling_first(int r, int k) {
    if (k < 0 || k > r) throw std::invalid_argument("stirling_first: requires 0 <= k <= r");
    return stirling_first_row(r)[k];
}

double pow_int(double x, int n) {
    double out = 1.0;
    for (int i = 0; i < n; ++i) out *= x;
    return out;
}

namespace {

// Multiplier taking series term j-1 to term j.
double term_ratio(const GhdFamily& f, double z, int j) {
    double num = z;
    for (double a : f.upper) num *= a + (j - 1);
    double den = j;
    for (double b : f.lower) den *= b + (j - 1);
    return num / den;
}

}  // namespace

double pfq(const GhdFamily& family, double z, const PfqOptions& opts, int* terms_used) {
    family.validate();
    const bool finite = family.terminating();
    const int stop_at = finite ? family.termination_terms() : opts.max_terms;

    double sum = 1.0;
    double term = 1.0;
    int used = 1;
    for (int j = 1; j < stop_at; ++j) {
        term *= term_ratio(family, z, j);
        sum += term;
        ++used;
        if (!finite && std::abs(term) <= opts.tolerance * std::abs(sum)) {
            if (terms_used) *terms_used = used;
            return sum;
        }
    }
    if (!finite)
        throw DivergenceError(family_name(family) + ": series did not meet tolerance within " +
                              std::to_string(opts.max_terms) + " terms");
    if (terms_used) *terms_used = used;
    return sum;
}

namespace {

// Closed forms for the pF0 families, worked in log space. The generic
// alternating inversion loses the deep tail for these (binomially weighted
// series terms can exceed the pmf value by many orders), while the pgf
// (1 - theta(s-1))^{-a} expands exactly.
double pmf_closed_form(double a, double theta, long long x, const GhdFamily& family) {
    if (a == 0.0) {  // Poisson(theta)
        if (theta < 0.0) throw NegativeMassError(family.label + ": needs theta >= 0");
        if (theta == 0.0) return x == 0 ? 1.0 : 0.0;
        return std::exp(-theta + x * std::log(theta) - std::lgamma(x + 1.0));
    }
    if (a < 0.0 && std::abs(a - std::round(a)) < 1e-9) {
        // binomial(N, p) with theta = -p
        const auto n = static_cast<long long>(std::llround(-a));
        if (x > n) return 0.0;
        const double p = -theta;
        if (p < 0.0 || p > 1.0)
            throw NegativeMassError(family.label + ": binomial needs theta = -p in [-1, 0]");
        if (p == 0.0) return x == 0 ? 1.0 : 0.0;
        if (p == 1.0) return x == n ? 1.0 : 0.0;
        const double log_choose =
            std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0);
        return std::exp(log_choose + x * std::log(p) + (n - x) * std::log1p(-p));
    }
    if (a > 0.0) {
        // negative binomial: success probability 1/(1+theta)
        if (theta < 0.0)
            throw NegativeMassError(family.label + ": negative binomial needs theta >= 0");
        if (theta == 0.0) return x == 0 ? 1.0 : 0.0;
        const double log_coeff =
            std::lgamma(a + x) - std::lgamma(a) - std::lgamma(x + 1.0);
        return std::exp(log_coeff + x * (std::log(theta) - std::log1p(theta)) -
                        a * std::log1p(theta));
    }
    // negative non-integer upper parameter: no distribution interpretation
    throw NegativeMassError(family.label + ": upper parameter " + std::to_string(a) +
                            " does not define a count distribution");
}

}  // namespace

double ghd_pmf(const GhdFamily& family, double theta, long long x) {
    family.validate();
    if (x < 0) throw std::invalid_argument("ghd_pmf: x must be >= 0");
    if (family.lower.empty() && family.upper.size() <= 1) {
        const double a = family.upper.empty() ? 0.0 : family.upper[0];
        return pmf_closed_form(a, theta, x, family);
    }

    const bool finite = family.terminating();
    const int finite_terms = finite ? family.termination_terms() : 0;
    if (finite && x >= finite_terms) return 0.0;

    // term t_j of the series at argument theta, tracked from j = x upward;
    // binom holds C(j, x).
    double t = 1.0;
    for (int j = 1; j <= x; ++j) t *= term_ratio(family, theta, j);

    double sum = 0.0;
    double binom = 1.0;
    double scale = 0.0;
    int sign = 1;
    const int max_terms = 100000;
    int tail = 0;
    for (int j = static_cast<int>(x);; ++j, ++tail) {
        if (finite && j >= finite_terms) break;
        if (tail > 0) {
            t *= term_ratio(family, theta, j);
            binom *= static_cast<double>(j) / static_cast<double>(j - x);
        }
        const double contrib = sign * binom * t;
        sum += contrib;
        sign = -sign;
        scale = std::max(scale, std::abs(contrib));
        if (!finite && tail > 1 && std::abs(contrib) <= 1e-16 * std::max(scale, 1.0) &&
            std::abs(binom * t) <= std::abs(sum) * 1e-14 + 1e-300)
            break;
        if (tail >= max_terms)
            throw DivergenceError(family_name(family) + ": pmf tail did not settle");
    }

    if (sum < 0.0) {
        if (sum < -1e-12 * std::max(scale, 1.0)) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%s: negative mass %.3e at x=%lld (check theta sign)",
                          family_name(family).c_str(), sum, static_cast<long long>(x));
            throw NegativeMassError(buf);
        }
        sum = 0.0;
    }
    return sum;
}

double cmr_coefficient(const GhdFamily& family, int r) {
    if (r < 2) throw std::invalid_argument("cmr_coefficient: r must be >= 2");
    family.validate();
    double out = 1.0;
    for (double a : family.upper) {
        if (a == 0.0)
            throw SingularParameterError(family_name(family) + ": upper parameter 0 in ratio constant");
        out *= falling_factorial(a + r - 1, r) / pow_int(a, r);
    }
    for (double b : family.lower) {
        const double den = falling_factorial(b + r - 1, r);
        if (den == 0.0)
            throw SingularParameterError(family_name(family) + ": (b+r-1)_r vanishes in ratio constant");
        out *= pow_int(b, r) / den;
    }
    return out;
}

double cmr_function(const CmrSpec& spec, double x) {
    if (x < 0) throw std::invalid_argument("cmr_function: x must be >= 0");
    return spec.coefficient * pow_int(x, spec.order);
}

}  // namespace mrs
