#pragma once
#include <cmath>
#include <functional>
#include <vector>

#include <gsl/gsl_integration.h>

namespace rs {

/// Flat node/weight list; compose panels by concatenation.
struct QuadratureRule {
	std::vector<double> nodes;
	std::vector<double> weights;
	std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [a, b].
inline QuadratureRule gauss_legendre(int n, double a, double b) {
	gsl_integration_glfixed_table* table =
	    gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
	QuadratureRule rule;
	rule.nodes.resize(static_cast<std::size_t>(n));
	rule.weights.resize(static_cast<std::size_t>(n));
	for (int i = 0; i < n; ++i) {
		double xi = 0.0, wi = 0.0;
		gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &xi, &wi, table);
		rule.nodes[static_cast<std::size_t>(i)] = xi;
		rule.weights[static_cast<std::size_t>(i)] = wi;
	}
	gsl_integration_glfixed_table_free(table);
	return rule;
}

/// Composite Gauss-Legendre over consecutive panels given by `edges`.
inline QuadratureRule composite_gl(int n, const std::vector<double>& edges) {
	QuadratureRule rule;
	for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
		QuadratureRule panel = gauss_legendre(n, edges[p], edges[p + 1]);
		rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
		rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
	}
	return rule;
}

inline std::vector<double> uniform_edges(double a, double b, int panels) {
	std::vector<double> edges;
	for (int i = 0; i <= panels; ++i)
		edges.push_back(a + (b - a) * static_cast<double>(i) / panels);
	return edges;
}

/// Edges accumulating geometrically towards `a` (first edge is `a` itself);
/// suits integrands with a boundary layer or integrable singularity at `a`.
inline std::vector<double> geometric_edges(double a, double b, int panels, double ratio = 2.0) {
	std::vector<double> edges{a};
	double step = (b - a) * std::pow(ratio, -static_cast<double>(panels - 1));
	double at = a + step;
	for (int i = 0; i < panels; ++i) {
		edges.push_back(std::min(at, b));
		at = a + (at - a) * ratio;
	}
	edges.back() = b;
	return edges;
}

inline double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
	double total = 0.0;
	for (std::size_t i = 0; i < rule.size(); ++i) total += rule.weights[i] * f(rule.nodes[i]);
	return total;
}

} // namespace rs
