#pragma once

// Expression trees over R^n built from smooth atoms (affine, square, quartic,
// exp, weighted sums) and the nonsmooth atoms abs, plus, max2 and max-list.
// A tree evaluates either exactly (the nonsmooth function) or in smoothed
// form at a given mu, and composes its smoothing constants bottom-up.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sapgm/smoothing.hpp"
#include "sapgm/types.hpp"

namespace sapgm {

enum class Atom { Affine, Sum, Square, Quartic, Exp, Abs, Plus, Max2, MaxList };

inline const char* atom_name(Atom atom) {
    switch (atom) {
    case Atom::Affine: return "affine";
    case Atom::Sum: return "sum";
    case Atom::Square: return "square";
    case Atom::Quartic: return "quartic";
    case Atom::Exp: return "exp";
    case Atom::Abs: return "abs";
    case Atom::Plus: return "plus";
    case Atom::Max2: return "max2";
    case Atom::MaxList: return "max-list";
    }
    return "?";
}

/// Bounds for a subtree over a box, valid for every mu in (0, 1].
/// Both f and f~ lie in [lo, hi]; ||grad f~|| <= grad;
/// ||hess f~|| <= hess_smooth + hess_scaled / mu.
struct NodeBounds {
    double lo = 0.0;
    double hi = 0.0;
    double grad = 0.0;
    double hess_smooth = 0.0;
    double hess_scaled = 0.0;
    double kappa = 0.0;
};

class Expr {
public:
    static Expr affine(Vector coeffs, double offset = 0.0) {
        auto node = std::make_shared<Node>();
        node->atom = Atom::Affine;
        node->dim = static_cast<std::size_t>(coeffs.size());
        node->coeffs = std::move(coeffs);
        node->offset = offset;
        return Expr(std::move(node));
    }

    static Expr coordinate(std::size_t index, std::size_t dim) {
        if (index >= dim) {
            throw InvalidInput("coordinate index " + std::to_string(index) + " out of range for dimension " +
                               std::to_string(dim));
        }
        Vector a = Vector::Zero(static_cast<Eigen::Index>(dim));
        a[static_cast<Eigen::Index>(index)] = 1.0;
        return affine(std::move(a));
    }

    static Expr constant(double c, std::size_t dim) {
        return affine(Vector::Zero(static_cast<Eigen::Index>(dim)), c);
    }

    /// sum_j weights[j] * terms[j] + offset
    static Expr sum(std::vector<Expr> terms, std::vector<double> weights, double offset = 0.0) {
        if (terms.empty() || terms.size() != weights.size()) {
            throw InvalidInput("sum: need one weight per term and at least one term");
        }
        auto node = make_nary(Atom::Sum, std::move(terms));
        node->weights = std::move(weights);
        node->offset = offset;
        return Expr(std::move(node));
    }

    static Expr square(Expr e) { return unary(Atom::Square, std::move(e)); }
    static Expr quartic(Expr e) { return unary(Atom::Quartic, std::move(e)); }
    static Expr exp(Expr e) { return unary(Atom::Exp, std::move(e)); }
    static Expr abs(Expr e) { return unary(Atom::Abs, std::move(e)); }
    static Expr plus(Expr e) { return unary(Atom::Plus, std::move(e)); }

    static Expr max2(Expr a, Expr b) {
        std::vector<Expr> terms;
        terms.push_back(std::move(a));
        terms.push_back(std::move(b));
        return Expr(make_nary(Atom::Max2, std::move(terms)));
    }

    static Expr max_list(std::vector<Expr> terms) {
        if (terms.empty()) {
            throw InvalidInput("max-list: empty term list");
        }
        return Expr(make_nary(Atom::MaxList, std::move(terms)));
    }

    /// Builds a node from an atom name; names outside the supported set are rejected.
    static Expr make(std::string_view atom, std::vector<Expr> args) {
        auto need = [&](std::size_t count) {
            if (args.size() != count) {
                throw InvalidInput(std::string(atom) + ": expected " + std::to_string(count) + " argument(s)");
            }
        };
        if (atom == "square") { need(1); return square(std::move(args[0])); }
        if (atom == "quartic") { need(1); return quartic(std::move(args[0])); }
        if (atom == "exp") { need(1); return exp(std::move(args[0])); }
        if (atom == "abs") { need(1); return abs(std::move(args[0])); }
        if (atom == "plus") { need(1); return plus(std::move(args[0])); }
        if (atom == "max2") { need(2); return max2(std::move(args[0]), std::move(args[1])); }
        if (atom == "max-list") { return max_list(std::move(args)); }
        if (atom == "sum") {
            std::vector<double> ones(args.size(), 1.0);
            return sum(std::move(args), std::move(ones));
        }
        throw UnsupportedAtom(std::string(atom));
    }

    std::size_t dim() const { return node_->dim; }
    Atom atom() const { return node_->atom; }

    /// Exact (possibly nonsmooth) value.
    double true_value(const Vector& x) const {
        require_dim(x, node_->dim, "Expr::true_value");
        return eval_true(*node_, x);
    }

    /// Smoothed value; fills grad (resized to dim) when non-null.
    double value(const Vector& x, double mu, Vector* grad = nullptr) const {
        detail::require_positive_mu(mu, "Expr::value");
        require_dim(x, node_->dim, "Expr::value");
        return eval_smooth(*node_, x, mu, grad);
    }

    NodeBounds bounds(const Box& box) const { return analyze(*node_, box); }

    friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}, {1.0, 1.0}); }
    friend Expr operator-(const Expr& a, const Expr& b) { return sum({a, b}, {1.0, -1.0}); }
    friend Expr operator*(double w, const Expr& e) { return sum({e}, {w}); }
    friend Expr operator+(const Expr& e, double c) { return sum({e}, {1.0}, c); }
    friend Expr operator-(const Expr& e, double c) { return sum({e}, {1.0}, -c); }
    friend Expr operator-(const Expr& e) { return sum({e}, {-1.0}); }

private:
    struct Node {
        Atom atom = Atom::Affine;
        std::size_t dim = 0;
        Vector coeffs;
        double offset = 0.0;
        std::vector<double> weights;
        std::vector<std::shared_ptr<const Node>> children;
    };

    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    static std::shared_ptr<Node> make_nary(Atom atom, std::vector<Expr> terms) {
        auto node = std::make_shared<Node>();
        node->atom = atom;
        node->dim = terms.front().dim();
        for (auto& t : terms) {
            if (t.dim() != node->dim) {
                throw InvalidInput(std::string(atom_name(atom)) + ": operand dimensions differ");
            }
            node->children.push_back(std::move(t.node_));
        }
        return node;
    }

    static Expr unary(Atom atom, Expr e) {
        std::vector<Expr> terms;
        terms.push_back(std::move(e));
        return Expr(make_nary(atom, std::move(terms)));
    }

    static double eval_true(const Node& n, const Vector& x) {
        switch (n.atom) {
        case Atom::Affine:
            return n.coeffs.dot(x) + n.offset;
        case Atom::Sum: {
            double v = n.offset;
            for (std::size_t j = 0; j < n.children.size(); ++j) {
                v += n.weights[j] * eval_true(*n.children[j], x);
            }
            return v;
        }
        case Atom::Square: {
            const double c = eval_true(*n.children[0], x);
            return c * c;
        }
        case Atom::Quartic: {
            const double c = eval_true(*n.children[0], x);
            return (c * c) * (c * c);
        }
        case Atom::Exp:
            return std::exp(eval_true(*n.children[0], x));
        case Atom::Abs:
            return std::abs(eval_true(*n.children[0], x));
        case Atom::Plus:
            return std::max(eval_true(*n.children[0], x), 0.0);
        case Atom::Max2:
        case Atom::MaxList: {
            double v = eval_true(*n.children[0], x);
            for (std::size_t j = 1; j < n.children.size(); ++j) {
                v = std::max(v, eval_true(*n.children[j], x));
            }
            return v;
        }
        }
        return 0.0;
    }

    static double eval_smooth(const Node& n, const Vector& x, double mu, Vector* grad) {
        const auto dim = static_cast<Eigen::Index>(n.dim);
        switch (n.atom) {
        case Atom::Affine:
            if (grad) {
                *grad = n.coeffs;
            }
            return n.coeffs.dot(x) + n.offset;
        case Atom::Sum: {
            double v = n.offset;
            Vector child_grad;
            if (grad) {
                grad->setZero(dim);
            }
            for (std::size_t j = 0; j < n.children.size(); ++j) {
                v += n.weights[j] * eval_smooth(*n.children[j], x, mu, grad ? &child_grad : nullptr);
                if (grad) {
                    *grad += n.weights[j] * child_grad;
                }
            }
            return v;
        }
        case Atom::Square:
        case Atom::Quartic:
        case Atom::Exp:
        case Atom::Abs:
        case Atom::Plus: {
            const double c = eval_smooth(*n.children[0], x, mu, grad);
            double v = 0.0;
            double d = 0.0;
            switch (n.atom) {
            case Atom::Square: v = c * c; d = 2.0 * c; break;
            case Atom::Quartic: v = (c * c) * (c * c); d = 4.0 * c * c * c; break;
            case Atom::Exp: v = std::exp(c); d = v; break;
            case Atom::Abs: { const auto s = smooth_abs(c, mu); v = s.value; d = s.derivative; break; }
            default: { const auto s = smooth_plus(c, mu); v = s.value; d = s.derivative; break; }
            }
            if (grad) {
                *grad *= d;
            }
            return v;
        }
        case Atom::Max2: {
            Vector ga;
            Vector gb;
            const double a = eval_smooth(*n.children[0], x, mu, grad ? &ga : nullptr);
            const double b = eval_smooth(*n.children[1], x, mu, grad ? &gb : nullptr);
            const auto s = smooth_max2(a, b, mu);
            if (grad) {
                *grad = s.grad_a * ga + s.grad_b * gb;
            }
            return s.value;
        }
        case Atom::MaxList: {
            const std::size_t k = n.children.size();
            std::vector<double> values(k);
            std::vector<Vector> grads(grad ? k : 0);
            for (std::size_t j = 0; j < k; ++j) {
                values[j] = eval_smooth(*n.children[j], x, mu, grad ? &grads[j] : nullptr);
            }
            const auto s = smooth_max_list(values, mu);
            if (grad) {
                grad->setZero(dim);
                for (std::size_t j = 0; j < k; ++j) {
                    *grad += s.weights[j] * grads[j];
                }
            }
            return s.value;
        }
        }
        return 0.0;
    }

    static NodeBounds analyze(const Node& n, const Box& box) {
        NodeBounds out;
        switch (n.atom) {
        case Atom::Affine: {
            out.lo = out.hi = n.offset;
            for (Eigen::Index j = 0; j < n.coeffs.size(); ++j) {
                const double a = n.coeffs[j] * box.lower[j];
                const double b = n.coeffs[j] * box.upper[j];
                out.lo += std::min(a, b);
                out.hi += std::max(a, b);
            }
            out.grad = n.coeffs.norm();
            return out;
        }
        case Atom::Sum: {
            out.lo = out.hi = n.offset;
            for (std::size_t j = 0; j < n.children.size(); ++j) {
                const NodeBounds c = analyze(*n.children[j], box);
                const double w = n.weights[j];
                const double aw = std::abs(w);
                out.lo += std::min(w * c.lo, w * c.hi);
                out.hi += std::max(w * c.lo, w * c.hi);
                out.grad += aw * c.grad;
                out.hess_smooth += aw * c.hess_smooth;
                out.hess_scaled += aw * c.hess_scaled;
                out.kappa += aw * c.kappa;
            }
            return out;
        }
        case Atom::Square:
        case Atom::Quartic:
        case Atom::Exp: {
            const NodeBounds c = analyze(*n.children[0], box);
            const double big = std::max(std::abs(c.lo), std::abs(c.hi));
            const double small = (c.lo <= 0.0 && c.hi >= 0.0) ? 0.0 : std::min(std::abs(c.lo), std::abs(c.hi));
            double slope = 0.0;     // max |phi'| over [lo, hi]
            double curvature = 0.0; // max |phi''| over [lo, hi]
            if (n.atom == Atom::Square) {
                out.lo = small * small;
                out.hi = big * big;
                slope = 2.0 * big;
                curvature = 2.0;
            } else if (n.atom == Atom::Quartic) {
                out.lo = std::pow(small, 4);
                out.hi = std::pow(big, 4);
                slope = 4.0 * big * big * big;
                curvature = 12.0 * big * big;
            } else {
                out.lo = std::exp(c.lo);
                out.hi = std::exp(c.hi);
                slope = out.hi;
                curvature = out.hi;
            }
            out.grad = slope * c.grad;
            out.hess_smooth = curvature * c.grad * c.grad + slope * c.hess_smooth;
            out.hess_scaled = slope * c.hess_scaled;
            out.kappa = slope * c.kappa;
            return out;
        }
        case Atom::Abs:
        case Atom::Plus: {
            const NodeBounds c = analyze(*n.children[0], box);
            const SmoothingConstants atom = n.atom == Atom::Abs ? kAbsConstants : kPlusConstants;
            if (n.atom == Atom::Abs) {
                out.lo = (c.lo <= 0.0 && c.hi >= 0.0) ? 0.0 : std::min(std::abs(c.lo), std::abs(c.hi));
                out.hi = std::max(std::abs(c.lo), std::abs(c.hi));
            } else {
                out.lo = std::max(c.lo, 0.0);
                out.hi = std::max(c.hi, 0.0);
            }
            out.hi += atom.kappa;
            out.grad = c.grad;
            out.hess_smooth = c.hess_smooth;
            out.hess_scaled = c.hess_scaled + atom.lip_factor * c.grad * c.grad;
            out.kappa = c.kappa + atom.kappa;
            return out;
        }
        case Atom::Max2:
        case Atom::MaxList: {
            std::vector<NodeBounds> cs;
            for (const auto& child : n.children) {
                cs.push_back(analyze(*child, box));
            }
            out = cs.front();
            double grad_sum = 0.0;
            for (const auto& c : cs) {
                out.lo = std::max(out.lo, c.lo);
                out.hi = std::max(out.hi, c.hi);
                out.grad = std::max(out.grad, c.grad);
                out.hess_smooth = std::max(out.hess_smooth, c.hess_smooth);
                out.hess_scaled = std::max(out.hess_scaled, c.hess_scaled);
                out.kappa = std::max(out.kappa, c.kappa);
                grad_sum += c.grad;
            }
            if (n.atom == Atom::Max2) {
                out.hi += kMax2Constants.kappa;
                out.kappa += kMax2Constants.kappa;
                // (1/2) h''(a - b) (da - db)^2 with h'' <= 1 / (2 mu)
                out.hess_scaled += 0.25 * grad_sum * grad_sum;
            } else {
                const auto atom = max_list_constants(cs.size());
                out.hi += atom.kappa;
                out.kappa += atom.kappa;
                // softmax Hessian term is a weighted variance of directional slopes
                out.hess_scaled += atom.lip_factor * out.grad * out.grad;
            }
            return out;
        }
        }
        return out;
    }

    std::shared_ptr<const Node> node_;
};

} // namespace sapgm
