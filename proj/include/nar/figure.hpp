#pragma once

#include <nar/engine.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace nar {

/// Decimal rendering of a rational, 6 fractional digits, exact half-up
/// rounding, trailing zeros trimmed.
inline std::string svg_decimal(const Rational& x) {
    static const mpz_class kScale = 1000000;
    mpq_class scaled = x * Rational(kScale);
    mpz_class twice = scaled.get_num() * 2 + scaled.get_den();  // 2*s + 1 halves
    mpz_class rounded;
    mpz_fdiv_q(rounded.get_mpz_t(), twice.get_mpz_t(), mpz_class(scaled.get_den() * 2).get_mpz_t());
    bool neg = rounded < 0;
    mpz_class mag = neg ? mpz_class(-rounded) : rounded;
    mpz_class whole = mag / kScale;
    mpz_class frac = mag % kScale;
    std::string out = (neg ? "-" : "") + whole.get_str();
    if (frac != 0) {
        std::string f = frac.get_str();
        f.insert(f.begin(), 6 - f.size(), '0');
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += "." + f;
    }
    return out;
}

namespace detail {

struct SvgWriter {
    std::ostringstream body;
    std::ostringstream labels;
    Rational xmax = 0, ymax = 0;

    void grow(const RatVector& p) {
        if (p[0] > xmax) xmax = p[0];
        if (p[1] > ymax) ymax = p[1];
    }

    void point(const std::string& id, const std::string& cls, const RatVector& p) {
        grow(p);
        body << "  <circle id=\"" << id << "\" class=\"" << cls << "\" cx=\"" << svg_decimal(p[0])
             << "\" cy=\"" << svg_decimal(p[1]) << "\" r=\"0.12\"/>\n";
    }

    void segment(const std::string& id, const std::string& cls, const RatVector& a,
                 const RatVector& b) {
        grow(a);
        grow(b);
        body << "  <line id=\"" << id << "\" class=\"" << cls << "\" x1=\"" << svg_decimal(a[0])
             << "\" y1=\"" << svg_decimal(a[1]) << "\" x2=\"" << svg_decimal(b[0]) << "\" y2=\""
             << svg_decimal(b[1]) << "\"/>\n";
    }

    void polygon(const std::string& id, const std::string& cls, std::vector<RatVector> pts) {
        // convex vertices in cyclic order around their centroid
        RatVector c(2, Rational(0));
        for (const auto& p : pts) c = add(c, p);
        c = scale(rat(1, static_cast<long>(pts.size())), c);
        auto half = [&](const RatVector& p) {
            Rational dx = p[0] - c[0], dy = p[1] - c[1];
            return dy < 0 || (dy == 0 && dx < 0) ? 1 : 0;
        };
        std::sort(pts.begin(), pts.end(), [&](const RatVector& p, const RatVector& q) {
            int hp = half(p), hq = half(q);
            if (hp != hq) return hp < hq;
            Rational cross = (p[0] - c[0]) * (q[1] - c[1]) - (p[1] - c[1]) * (q[0] - c[0]);
            if (cross != 0) return cross > 0;
            return lex_less(p, q);
        });
        body << "  <polygon id=\"" << id << "\" class=\"" << cls << "\" points=\"";
        for (size_t i = 0; i < pts.size(); ++i) {
            grow(pts[i]);
            if (i) body << " ";
            body << svg_decimal(pts[i][0]) << "," << svg_decimal(pts[i][1]);
        }
        body << "\"/>\n";
    }

    void shape(const std::string& id, const std::string& cls, const Polytope& p) {
        if (p.is_empty()) return;
        const auto& vs = p.vertices();
        if (vs.size() == 1)
            point(id, cls, vs[0]);
        else if (vs.size() == 2)
            segment(id, cls, vs[0], vs[1]);
        else
            polygon(id, cls, vs);
    }

    void label(const std::string& text, const RatVector& p) {
        labels << "  <text class=\"label\" x=\"" << svg_decimal(p[0]) << "\" y=\""
               << svg_decimal(Rational(-p[1])) << "\">" << text << "</text>\n";
    }
};

}  // namespace detail

/// SVG rendering of a two-asset-plus-bank model: the boxes C_t, the hulls X_t
/// (dashed) and the recursion values V_t, in exact data coordinates.
inline std::string render_figure(const MarketModel& model, const BankTrace& trace, int t_lo,
                                 int t_hi) {
    if (model.kind != MarketKind::BankAccount || model.assets != 3)
        throw std::domain_error("figure: needs a bank-account model with exactly 3 assets");
    const ScenarioTree& tree = model.tree;
    detail::SvgWriter w;
    for (int t = t_lo; t <= t_hi; ++t)
        for (int v : tree.nodes_at(t)) {
            const std::string& id = tree.node(v).id;
            w.shape("C" + std::to_string(t) + "-" + id, "box", model.boxes[v]);
            if (!tree.is_leaf(v)) {
                w.shape("X" + std::to_string(t) + "-" + id, "hull", trace.X[v]);
                w.shape("V" + std::to_string(t) + "-" + id, "result", trace.V[v]);
            }
            if (!model.boxes[v].is_empty()) {
                RatVector anchor = model.boxes[v].vertices().front();
                w.label("C" + std::to_string(t) + "(" + id + ")",
                        add(anchor, RatVector{Rational(1, 10), Rational(2, 10)}));
            }
        }

    Rational x1 = w.xmax + 1, y1 = w.ymax + 1;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"-1 "
        << svg_decimal(Rational(-y1)) << " " << svg_decimal(Rational(x1 + 1)) << " "
        << svg_decimal(Rational(y1 + 1)) << "\">\n";
    out << "  <style>\n"
           "    .axis{stroke:#222;stroke-width:0.04}\n"
           "    .box{fill:none;stroke:#222;stroke-width:0.06}\n"
           "    .hull{fill:none;stroke:#666;stroke-width:0.05;stroke-dasharray:0.3 0.2}\n"
           "    .result{fill:#b22;stroke:#b22;stroke-width:0.1}\n"
           "    circle.box,circle.result{stroke:none}\n"
           "    circle.box{fill:#222}\n"
           "    .label{font-size:0.45px;fill:#222}\n"
           "  </style>\n";
    out << "<g transform=\"scale(1,-1)\">\n";
    out << "  <line id=\"axis-x\" class=\"axis\" x1=\"0\" y1=\"0\" x2=\"" << svg_decimal(x1)
        << "\" y2=\"0\"/>\n";
    out << "  <line id=\"axis-y\" class=\"axis\" x1=\"0\" y1=\"0\" x2=\"0\" y2=\""
        << svg_decimal(y1) << "\"/>\n";
    out << w.body.str();
    out << "</g>\n";
    out << w.labels.str();
    out << "</svg>\n";
    return out.str();
}

}  // namespace nar
