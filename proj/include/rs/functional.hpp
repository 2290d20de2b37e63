#pragma once
#include "rs/coproduct.hpp"
#include <functional>
#include <memory>

namespace rs {

/// Multiplicative linear functional (character) on the positive algebra,
/// determined by its values on generators: the coordinates X_0..X_d and the
/// decorated nodes J_l(tau). Extension to monomials is by multiplicativity,
/// memoised per character.
class Character {
public:
	/// gen receives either a single-coordinate poly (X_axis) or a
	/// single-factor J node with multiplicity one.
	using GenFn = std::function<Rational(const TPlusSymbol&)>;

	explicit Character(GenFn gen) : state_(std::make_shared<State>(std::move(gen))) {}

	Rational operator()(const TPlusSymbol& s) const;

	/// The identity of the character group: all generator values zero.
	static Character counit(int dim);

private:
	struct State {
		explicit State(GenFn g) : gen(std::move(g)) {}
		GenFn gen;
		std::map<TPlusSymbol, Rational> memo;
	};
	std::shared_ptr<State> state_;
};

/// Convolution (f * g)(s) = sum f(s1) g(s2) over Delta+ s; the group law of
/// the structure group.
Character convolve(const Character& f, const Character& g,
                   std::shared_ptr<CoproductContext> ctx);

/// Convolution inverse, computed by triangular recursion over generators.
Character convolution_inverse(const Character& f, std::shared_ptr<CoproductContext> ctx);

/// Gamma_f tau = (id ⊗ f) Delta tau.
FormalSum<Rational> gamma_apply(const Character& f, const Symbol& tau, CoproductContext& ctx);

} // namespace rs
