#ifndef FIBERSPEC_FIBER_FUNCTION_HPP
#define FIBERSPEC_FIBER_FUNCTION_HPP

#include <complex>
#include <span>
#include <vector>

namespace fiberspec {

using cplx = std::complex<double>;

/// One real trigonometric term a*cos(2 pi k x) + b*sin(2 pi k x).
struct TrigTerm {
    int k;
    double a;
    double b;
};

/// A function on the circle R/Z stored as truncated Fourier coefficients
/// c_{-N..N}, u(x) = sum_k c_k exp(2 pi i k x).
///
/// Real functions satisfy c_{-k} = conj(c_k). The integral against
/// normalized Lebesgue measure is c_0 exactly.
class FiberFunction {
public:
    FiberFunction() = default;
    explicit FiberFunction(int truncation);
    FiberFunction(int truncation, std::vector<cplx> coeffs);

    static FiberFunction constant(int truncation, double value);
    /// c0 + sum_t [a_t cos(2 pi k_t x) + b_t sin(2 pi k_t x)]; |k_t| <= truncation.
    static FiberFunction trig(int truncation, double c0, std::span<const TrigTerm> terms);
    /// exp(2 pi i k x)
    static FiberFunction mode(int truncation, int k);
    /// Discrete Fourier projection of equispaced samples u(j/M), j=0..M-1.
    /// Requires M >= 2*truncation+1.
    static FiberFunction from_samples(int truncation, std::span<const cplx> samples);

    int truncation() const noexcept { return n_; }
    int size() const noexcept { return 2 * n_ + 1; }

    cplx coeff(int k) const;
    cplx& coeff(int k);
    std::span<const cplx> coeffs() const noexcept { return c_; }
    std::span<cplx> coeffs() noexcept { return c_; }

    cplx operator()(double x) const;
    cplx derivative_at(double x) const;
    cplx integral() const { return coeff(0); }

    FiberFunction derivative() const;
    /// Same function re-truncated to `truncation` modes (zero-padded or cut).
    FiberFunction resized(int truncation) const;

    /// Values on the grid j/M, j = 0..M-1, by inverse FFT.
    std::vector<cplx> samples(int grid_size) const;

    /// sup |u|: 4N-point grid maximum refined by safeguarded Newton.
    double sup_norm() const;
    /// C^1 norm sup|u| + sup|u'| (the C^{r-1} norm for r = 2).
    double c1_norm() const;
    /// sup |u| on the oversampled grid only (no refinement).
    double grid_sup() const;

    bool is_real(double tol = 1e-12) const;

    FiberFunction& operator+=(const FiberFunction& o);
    FiberFunction& operator-=(const FiberFunction& o);
    FiberFunction& operator*=(cplx s);

    friend FiberFunction operator+(FiberFunction a, const FiberFunction& b) { return a += b; }
    friend FiberFunction operator-(FiberFunction a, const FiberFunction& b) { return a -= b; }
    friend FiberFunction operator*(FiberFunction a, cplx s) { return a *= s; }
    friend FiberFunction operator*(cplx s, FiberFunction a) { return a *= s; }

    bool operator==(const FiberFunction&) const = default;

private:
    int n_ = 0;
    std::vector<cplx> c_;
};

/// Bilinear pairing int phi * u dm (no conjugation).
cplx pair(const FiberFunction& phi, const FiberFunction& u);

/// Oversampled grid size used by the sup-norm estimates.
int oversampled_grid(int truncation);

/// exp(2 pi i k y) with the phase reduced mod 1 before the trig call, so
/// dyadic arguments stay exact.
cplx unit_phase(int k, double y);

} // namespace fiberspec

#endif
