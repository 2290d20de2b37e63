#pragma once
#include "rs/renorm.hpp"
#include "rs/homogeneity.hpp"
#include <utility>

namespace rs {

/// Coefficients of the renormalised equation written as
/// du = Lap u + cubic u^3 + quintic (eps u^5) + eps_cubic (eps u^3)
///      + mass u + constant + xi.
/// hermite_mass is the residual mass m after rewriting the polynomial part
/// on Wick ordered form -H3(u, C1) - a eps H5(u, C1) - m u.
struct PDECoefficients {
	Poly cubic;
	Poly quintic;
	Poly eps_cubic;
	Poly mass;
	Poly constant;
	Poly hermite_mass;
	std::string report;
};

/// Truncated abstract fixed point Phi = I(Xi - Phi^3) + phi 1 + <grad phi, X>,
/// kept to homogeneity <= 1. Coefficients live in Q[phi, dphi1..dphid].
FormalSum<Poly> cubic_ansatz(const HomogeneityParams& params);

/// Fixed point with the additional -a I(E(Phi^5)) term of the extended rules.
FormalSum<Poly> extended_ansatz(const HomogeneityParams& params, const Poly& a);

/// Push the abstract right hand side through M and match it against the
/// renormalised template; throws TruncationInsufficient when terms fail to
/// cancel into the template shape.
PDECoefficients renormalized_equation(const RenormMap& M, const HomogeneityParams& params);
PDECoefficients renormalized_equation_extended(const RenormMap& M, const Poly& a,
                                               const HomogeneityParams& params);

/// Both sides of the constant-shift identity
///   theta/eps u - H3(u, C/eps) - a eps H5(u, C/eps)
///     = (theta + 3C - 15 a C^2)/eps u - (1 - 10 a C) u^3 - a eps u^5
/// as polynomials in u, theta, a, C at fixed rational eps > 0.
std::pair<Poly, Poly> hermite_shift_identity(const Rational& eps);

/// Gaussian smoothing of a polynomial in `xvar` at variance C:
/// x^n maps to sum over even k of binom(n,k) (k-1)!! C^{k/2} x^{n-k}.
/// Inverts Wick ordering: the image of H_n(x, C) is x^n.
Poly gaussian_smooth(const Poly& p, const std::string& xvar, const Poly& C);

} // namespace rs
