#pragma once

// JSON (de)serialization for bodies, GRep valuations, and result
// envelopes. Every result JSON embeds the normalization conventions and
// the seed so outputs are self-describing and reproducible.

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "vallab/body.hpp"
#include "vallab/mc.hpp"
#include "vallab/valuation.hpp"

namespace vallab {

using json = nlohmann::json;

inline Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
    json j = json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

// Matrices as row-major lists of rows.
inline Eigen::MatrixXd matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    if (rows == 0) throw std::invalid_argument("matrix_from_json: empty matrix");
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
    json j = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

inline ConvexBody body_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "ball")
        return ConvexBody::ball(vector_from_json(j.at("center")), j.at("radius").get<double>());
    if (type == "point") return ConvexBody::point(vector_from_json(j.at("coordinates")));
    if (type == "ellipsoid")
        return ConvexBody::ellipsoid(vector_from_json(j.at("center")),
                                     matrix_from_json(j.at("shape")));
    if (type == "polytope") {
        // vertices: list of points.
        const Eigen::MatrixXd rows = matrix_from_json(j.at("vertices"));
        return ConvexBody::polytope(rows.transpose());
    }
    if (type == "box")
        return ConvexBody::axis_box(vector_from_json(j.at("lo")), vector_from_json(j.at("hi")));
    if (type == "mink_sum") {
        std::vector<ConvexBody> parts;
        for (const auto& p : j.at("parts")) parts.push_back(body_from_json(p));
        return ConvexBody::mink_sum(std::move(parts));
    }
    if (type == "scaled")
        return ConvexBody::scaled(j.at("factor").get<double>(), body_from_json(j.at("body")));
    if (type == "transformed")
        return ConvexBody::transformed(
            RigidMotion(matrix_from_json(j.at("rotation")),
                        vector_from_json(j.at("translation"))),
            body_from_json(j.at("body")));
    throw std::invalid_argument("body_from_json: unknown body type '" + type + "'");
}

inline json body_to_json(const ConvexBody& b) {
    json j;
    switch (b.kind()) {
        case ConvexBody::Kind::Ball:
            j["type"] = "ball";
            j["center"] = vector_to_json(b.center());
            j["radius"] = b.radius();
            return j;
        case ConvexBody::Kind::Ellipsoid:
            j["type"] = "ellipsoid";
            j["center"] = vector_to_json(b.center());
            j["shape"] = matrix_to_json(b.shape());
            return j;
        case ConvexBody::Kind::Polytope:
            j["type"] = "polytope";
            j["vertices"] = matrix_to_json(b.vertices().transpose());
            return j;
        case ConvexBody::Kind::MinkSum: {
            j["type"] = "mink_sum";
            j["parts"] = json::array();
            for (const auto& p : b.parts()) j["parts"].push_back(body_to_json(p));
            return j;
        }
        case ConvexBody::Kind::Scaled:
            j["type"] = "scaled";
            j["factor"] = b.factor();
            j["body"] = body_to_json(b.child());
            return j;
        case ConvexBody::Kind::Transformed:
            j["type"] = "transformed";
            j["rotation"] = matrix_to_json(b.motion().rotation);
            j["translation"] = vector_to_json(b.motion().translation);
            j["body"] = body_to_json(b.child());
            return j;
    }
    throw std::logic_error("body_to_json: unknown kind");
}

// Densities as {"exponents": coeff} with comma-separated exponents, e.g.
// {"2,0": 1.0, "0,0": -0.5}.
inline Polynomial polynomial_from_json(const json& j, int nvars) {
    Polynomial p;
    p.nvars = nvars;
    for (const auto& [key, val] : j.items()) {
        Eigen::VectorXi e(nvars);
        std::stringstream ss(key);
        std::string tok;
        int q = 0;
        while (std::getline(ss, tok, ',')) {
            if (q >= nvars) throw std::invalid_argument("polynomial_from_json: too many exponents");
            e[q++] = std::stoi(tok);
        }
        if (q != nvars)
            throw std::invalid_argument("polynomial_from_json: exponent count mismatch");
        p.terms.emplace_back(e, val.get<double>());
    }
    return p;
}

inline json polynomial_to_json(const Polynomial& p) {
    json j = json::object();
    for (const auto& [e, c] : p.terms) {
        std::string key;
        for (int i = 0; i < e.size(); ++i) {
            if (i) key += ',';
            key += std::to_string(e[i]);
        }
        j[key] = c;
    }
    return j;
}

inline GRep grep_from_json(const json& j) {
    GRep g;
    g.chi = j.value("chi", 0.0);
    if (j.contains("terms"))
        for (const auto& t : j.at("terms")) {
            ConvexBody body = body_from_json(t.at("body"));
            g.terms.push_back({polynomial_from_json(t.at("density"), body.dim()), body});
        }
    return g;
}

inline json grep_to_json(const GRep& g) {
    json j;
    j["chi"] = g.chi;
    j["terms"] = json::array();
    for (const auto& t : g.terms)
        j["terms"].push_back({{"density", polynomial_to_json(t.density)},
                              {"body", body_to_json(t.body)}});
    return j;
}

// The normalization declarations every result carries.
inline json conventions_json() {
    return {{"intrinsic_volumes", "V_i(unit ball in R^n) = omega_n for all i"},
            {"dU", "Haar probability on rotations x Lebesgue on translations"},
            {"dE", "Haar probability on the Grassmannian x Lebesgue on complement translations"},
            {"chi", "1 on every nonempty convex compact set; algebra unit"}};
}

inline json estimate_to_json(const MCEstimate& e) {
    return {{"value", e.value},
            {"stderr", e.stderror},
            {"samples", e.samples},
            {"seed", e.seed}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

}  // namespace vallab
