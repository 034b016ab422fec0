#include "df/kernels.hpp"

#include <cctype>
#include <cmath>

#include "df/common.hpp"

namespace df {

KernelSpec KernelSpec::constant(double c) {
  if (c < 0) throw config_error("constant kernel needs c >= 0");
  KernelSpec k;
  k.node = Node::Constant;
  k.a = c;
  return k;
}

KernelSpec KernelSpec::linear_x() {
  KernelSpec k;
  k.node = Node::LinearX;
  return k;
}

KernelSpec KernelSpec::product_p() {
  KernelSpec k;
  k.node = Node::ProductP;
  return k;
}

KernelSpec KernelSpec::fermi_sobolev() {
  KernelSpec k;
  k.node = Node::FermiSobolev;
  return k;
}

KernelSpec KernelSpec::gaussian(double gamma) {
  if (gamma < 0) throw config_error("gaussian kernel needs gamma >= 0");
  KernelSpec k;
  k.node = Node::Gaussian;
  k.a = gamma;
  return k;
}

KernelSpec KernelSpec::sum(std::vector<KernelSpec> parts) {
  if (parts.empty()) throw config_error("kernel sum needs at least one term");
  if (parts.size() == 1) return parts.front();
  KernelSpec k;
  k.node = Node::Sum;
  k.kids = std::move(parts);
  return k;
}

KernelSpec KernelSpec::scale(double a, KernelSpec inner) {
  if (a < 0) throw config_error("kernel scale needs a >= 0");
  KernelSpec k;
  k.node = Node::Scale;
  k.a = a;
  k.kids.push_back(std::move(inner));
  return k;
}

double fermi_sobolev_kernel(double p, double q) {
  const double lo = std::min(p, q);
  const double hi = std::min(1.0 - p, 1.0 - q);
  return 0.5 * lo * lo + 0.5 * hi * hi + 5.0 / 6.0;
}

double fs_norm_bump(double eps) {
  if (!(eps > 0)) throw config_error("fs_norm_bump needs eps > 0");
  return std::sqrt(eps * eps + 2.0 / eps);
}

namespace {

double dot(const Context& a, const Context& b) {
  if (a.size() != b.size()) throw game_error("context dimension mismatch in kernel");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sqdist(const Context& a, const Context& b) {
  if (a.size() != b.size()) throw game_error("context dimension mismatch in kernel");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// --- grammar ---------------------------------------------------------------
// expr := term ('+' term)*
// term := number | number '*' atom | atom
// atom := 'fs' | 'pp' | 'lin' | 'rbf' '(' number ')'

struct Parser {
  std::string_view s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }

  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& why) {
    throw config_error("kernel grammar error at offset " + std::to_string(i) + ": " + why +
                       " in '" + std::string(s) + "'");
  }

  bool peek_number() {
    skip_ws();
    return i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.');
  }

  double number() {
    skip_ws();
    std::size_t j = i;
    while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
                            s[j] == 'e' || s[j] == 'E' ||
                            ((s[j] == '+' || s[j] == '-') && j > i && (s[j - 1] == 'e' || s[j - 1] == 'E'))))
      ++j;
    if (j == i) fail("expected a number");
    double v;
    try {
      v = parse_double(s.substr(i, j - i));
    } catch (const config_error&) {
      fail("bad number");
    }
    i = j;
    return v;
  }

  std::string word() {
    skip_ws();
    std::size_t j = i;
    while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
    std::string w(s.substr(i, j - i));
    i = j;
    return w;
  }

  KernelSpec atom() {
    const std::string w = word();
    if (w == "fs") return KernelSpec::fermi_sobolev();
    if (w == "pp") return KernelSpec::product_p();
    if (w == "lin") return KernelSpec::linear_x();
    if (w == "rbf") {
      if (!eat('(')) fail("rbf needs '(gamma)'");
      const double g = number();
      if (!eat(')')) fail("rbf needs closing ')'");
      if (g < 0) fail("rbf gamma must be >= 0");
      return KernelSpec::gaussian(g);
    }
    fail(w.empty() ? "expected a kernel leaf" : "unknown kernel leaf '" + w + "'");
  }

  KernelSpec term() {
    if (peek_number()) {
      const double v = number();
      if (eat('*')) {
        if (v < 0) fail("scale must be >= 0");
        return KernelSpec::scale(v, atom());
      }
      if (v < 0) fail("constant must be >= 0");
      return KernelSpec::constant(v);
    }
    return atom();
  }

  KernelSpec expr() {
    std::vector<KernelSpec> parts;
    parts.push_back(term());
    while (true) {
      skip_ws();
      if (i >= s.size()) break;
      if (!eat('+')) fail("expected '+'");
      parts.push_back(term());
    }
    return KernelSpec::sum(std::move(parts));
  }
};

void print_term(const KernelSpec& k, std::string& out) {
  switch (k.node) {
    case KernelSpec::Node::Constant:
      out += fmt_double(k.a);
      return;
    case KernelSpec::Node::LinearX:
      out += "lin";
      return;
    case KernelSpec::Node::ProductP:
      out += "pp";
      return;
    case KernelSpec::Node::FermiSobolev:
      out += "fs";
      return;
    case KernelSpec::Node::Gaussian:
      out += "rbf(" + fmt_double(k.a) + ")";
      return;
    case KernelSpec::Node::Scale:
      out += fmt_double(k.a) + "*";
      print_term(k.kids.front(), out);
      return;
    case KernelSpec::Node::Sum:
      for (std::size_t i = 0; i < k.kids.size(); ++i) {
        if (i) out += " + ";
        print_term(k.kids[i], out);
      }
      return;
  }
}

}  // namespace

KernelSpec parse_kernel(std::string_view text) {
  Parser p{text};
  p.skip_ws();
  if (p.i >= text.size()) throw config_error("empty kernel expression");
  return p.expr();
}

std::string to_string(const KernelSpec& k) {
  std::string out;
  print_term(k, out);
  return out;
}

double kernel_eval(const KernelSpec& k, const Context& x, double p,
                   const Context& x2, double p2) {
  switch (k.node) {
    case KernelSpec::Node::Constant:
      return k.a;
    case KernelSpec::Node::LinearX:
      return dot(x, x2);
    case KernelSpec::Node::ProductP:
      return p * p2;
    case KernelSpec::Node::FermiSobolev:
      return fermi_sobolev_kernel(p, p2);
    case KernelSpec::Node::Gaussian:
      return std::exp(-k.a * sqdist(x, x2));
    case KernelSpec::Node::Scale:
      return k.a * kernel_eval(k.kids.front(), x, p, x2, p2);
    case KernelSpec::Node::Sum: {
      double s = 0;
      for (const auto& kid : k.kids) s += kernel_eval(kid, x, p, x2, p2);
      return s;
    }
  }
  throw game_error("corrupt kernel tree");
}

std::vector<std::vector<double>> gram_matrix(const KernelSpec& k,
                                             const std::vector<KernelPoint>& pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = kernel_eval(k, pts[i].first, pts[i].second, pts[j].first, pts[j].second);
      g[i][j] = v;
      g[j][i] = v;
    }
  return g;
}

namespace {

// Collects (scale, leaf) pairs; returns false if a leaf has no finite
// feature expansion.
bool collect_features(const KernelSpec& k, double scale,
                      std::vector<std::pair<double, KernelSpec::Node>>& out) {
  switch (k.node) {
    case KernelSpec::Node::Constant:
      out.emplace_back(scale * k.a, KernelSpec::Node::Constant);
      return true;
    case KernelSpec::Node::LinearX:
    case KernelSpec::Node::ProductP:
      out.emplace_back(scale, k.node);
      return true;
    case KernelSpec::Node::FermiSobolev:
    case KernelSpec::Node::Gaussian:
      return false;
    case KernelSpec::Node::Scale:
      return collect_features(k.kids.front(), scale * k.a, out);
    case KernelSpec::Node::Sum:
      for (const auto& kid : k.kids)
        if (!collect_features(kid, scale, out)) return false;
      return true;
  }
  return false;
}

FeatureMap feature_map_from_leaves(std::vector<std::pair<double, KernelSpec::Node>> leaves,
                                   int context_dim) {
  int dim = 0;
  for (const auto& [s, node] : leaves)
    dim += (node == KernelSpec::Node::LinearX) ? context_dim : 1;

  FeatureMap fm;
  fm.dim = dim;
  fm.fill = [leaves = std::move(leaves), context_dim](const Context& x, double p, double* out) {
    if (static_cast<int>(x.size()) != context_dim)
      throw game_error("feature map built for context dimension " + std::to_string(context_dim) +
                       " applied to dimension " + std::to_string(x.size()));
    std::size_t w = 0;
    for (const auto& [s, node] : leaves) {
      const double r = std::sqrt(s);
      switch (node) {
        case KernelSpec::Node::Constant:
          out[w++] = r;  // s already includes the constant's value
          break;
        case KernelSpec::Node::ProductP:
          out[w++] = r * p;
          break;
        case KernelSpec::Node::LinearX:
          for (int i = 0; i < context_dim; ++i) out[w++] = r * x[static_cast<std::size_t>(i)];
          break;
        default:
          break;
      }
    }
  };
  return fm;
}

// Partitions every summand into the finite collection or the remainder list.
void split_collect(const KernelSpec& k, double scale,
                   std::vector<std::pair<double, KernelSpec::Node>>& finite,
                   std::vector<KernelSpec>& rest) {
  switch (k.node) {
    case KernelSpec::Node::Constant:
      finite.emplace_back(scale * k.a, KernelSpec::Node::Constant);
      return;
    case KernelSpec::Node::LinearX:
    case KernelSpec::Node::ProductP:
      finite.emplace_back(scale, k.node);
      return;
    case KernelSpec::Node::FermiSobolev:
    case KernelSpec::Node::Gaussian:
      rest.push_back(scale == 1.0 ? k : KernelSpec::scale(scale, k));
      return;
    case KernelSpec::Node::Scale:
      split_collect(k.kids.front(), scale * k.a, finite, rest);
      return;
    case KernelSpec::Node::Sum:
      for (const auto& kid : k.kids) split_collect(kid, scale, finite, rest);
      return;
  }
  throw game_error("corrupt kernel tree");
}

}  // namespace

std::optional<FeatureMap> finite_feature_map(const KernelSpec& k, int context_dim) {
  if (context_dim < 0) throw config_error("context_dim must be >= 0");
  std::vector<std::pair<double, KernelSpec::Node>> leaves;
  if (!collect_features(k, 1.0, leaves)) return std::nullopt;
  return feature_map_from_leaves(std::move(leaves), context_dim);
}

KernelSplit split_finite_part(const KernelSpec& k, int context_dim) {
  if (context_dim < 0) throw config_error("context_dim must be >= 0");
  std::vector<std::pair<double, KernelSpec::Node>> leaves;
  std::vector<KernelSpec> rest;
  split_collect(k, 1.0, leaves, rest);

  KernelSplit out;
  if (!leaves.empty()) out.features = feature_map_from_leaves(std::move(leaves), context_dim);
  if (!rest.empty()) out.rest = KernelSpec::sum(std::move(rest));
  return out;
}

}  // namespace df
