#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace df {

using Context = std::vector<double>;

// Positive semidefinite kernel over (context, forecast) pairs, built as a
// sum of scaled leaves. Leaves:
//   Constant(c)     k = c, c >= 0
//   LinearX         k = <x, x'>
//   ProductP        k = p * p'
//   FermiSobolev    k = min(p,p')^2/2 + min(1-p,1-p')^2/2 + 5/6, p in [0,1]
//   Gaussian(g)     k = exp(-g |x - x'|^2), g >= 0
// Sum and Scale close the set under nonnegative combination, so every tree
// is PSD by construction.
struct KernelSpec {
  enum class Node { Constant, LinearX, ProductP, FermiSobolev, Gaussian, Sum, Scale };

  Node node = Node::Constant;
  double a = 1.0;  // Constant value, Scale factor, or Gaussian width
  std::vector<KernelSpec> kids;

  static KernelSpec constant(double c);
  static KernelSpec linear_x();
  static KernelSpec product_p();
  static KernelSpec fermi_sobolev();
  static KernelSpec gaussian(double gamma);
  static KernelSpec sum(std::vector<KernelSpec> parts);
  static KernelSpec scale(double a, KernelSpec inner);

  bool operator==(const KernelSpec&) const = default;
};

// Grammar: terms joined by '+', each term a leaf, a number (constant leaf),
// or number '*' leaf. Leaves: fs, pp, lin, rbf(<gamma>).
// Examples: "1 + fs + pp + lin", "0.5*fs + rbf(0.5)".
KernelSpec parse_kernel(std::string_view text);
std::string to_string(const KernelSpec& k);

double fermi_sobolev_kernel(double p, double q);

// Norm of the unit-height tent of half-width eps under the norm
// (integral of f)^2 + integral of f'^2: sqrt(eps^2 + 2/eps).
double fs_norm_bump(double eps);

double kernel_eval(const KernelSpec& k, const Context& x, double p,
                   const Context& x2, double p2);

using KernelPoint = std::pair<Context, double>;
std::vector<std::vector<double>> gram_matrix(const KernelSpec& k,
                                             const std::vector<KernelPoint>& pts);

// Finite feature expansion of a kernel tree: defined exactly when no
// FermiSobolev or Gaussian leaf occurs. Constant(c) contributes sqrt(c),
// ProductP contributes p, LinearX contributes the context coordinates.
struct FeatureMap {
  int dim = 0;
  // writes `dim` values into out
  std::function<void(const Context& x, double p, double* out)> fill;

  std::vector<double> at(const Context& x, double p) const {
    std::vector<double> v(static_cast<std::size_t>(dim));
    fill(x, p, v.data());
    return v;
  }
};

std::optional<FeatureMap> finite_feature_map(const KernelSpec& k, int context_dim);

// Splits a kernel sum into its finitely-representable summands (as one
// feature map) and the remainder (FermiSobolev/Gaussian terms). Evaluating
// features + rest equals evaluating the whole kernel; summing histories
// against only the rest part is what makes mixed kernels affordable.
struct KernelSplit {
  std::optional<FeatureMap> features;
  std::optional<KernelSpec> rest;
};
KernelSplit split_finite_part(const KernelSpec& k, int context_dim);

}  // namespace df
