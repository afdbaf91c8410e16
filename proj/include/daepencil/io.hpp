#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "daepencil/asymptotics.hpp"
#include "daepencil/consistent_iv.hpp"
#include "daepencil/core.hpp"
#include "daepencil/pencil.hpp"
#include "daepencil/solvers.hpp"

namespace daepencil {

using Json = nlohmann::json;

// JSON has no literals for infinities or NaN, so non-finite reals are emitted
// as the strings "inf", "-inf", "nan".
inline Json json_real(double x) {
    if (std::isfinite(x)) return x + 0.0;  // folds -0.0 into 0.0
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline Json complex_to_json(Complex z) {
    return Json::array({z.real() + 0.0, z.imag() + 0.0});
}

inline Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

/// Row-major nested array of [re, im] pairs.
inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json spectrum_to_json(const std::vector<Complex>& eigs) {
    Json out = Json::array();
    for (Complex z : eigs) out.push_back(complex_to_json(z));
    return out;
}

namespace detail {

inline Complex complex_from_json(const Json& e, const std::string& where) {
    if (e.is_number()) return Complex(e.get<double>(), 0.0);
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return Complex(e[0].get<double>(), e[1].get<double>());
    }
    throw ParseError(where + ": expected a number or a [re, im] pair, got " + e.dump());
}

inline Matrix matrix_from_json(const Json& m, Index n, const std::string& name) {
    if (!m.is_array()) throw ParseError(name + ": expected an array of rows");
    if (static_cast<Index>(m.size()) != n) {
        throw ParseError(name + ": has " + std::to_string(m.size()) + " rows, expected " +
                         std::to_string(n));
    }
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i) {
        const Json& row = m[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != n) {
            throw ParseError(name + ": row " + std::to_string(i) + " must be an array of " +
                             std::to_string(n) + " entries");
        }
        for (Index j = 0; j < n; ++j) {
            out(i, j) = complex_from_json(row[static_cast<std::size_t>(j)],
                                          name + "[" + std::to_string(i) + "][" +
                                              std::to_string(j) + "]");
        }
    }
    return out;
}

}  // namespace detail

/// Parses the pencil schema {"n": int, "m0": rows, "m1": rows} where each
/// entry is either a real number or a [re, im] pair.
inline Pencil parse_pencil(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("pencil JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("pencil JSON: top level must be an object");
    for (const char* key : {"n", "m0", "m1"}) {
        if (!doc.contains(key)) throw ParseError(std::string("pencil JSON: missing field \"") + key + "\"");
    }
    if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1) {
        throw ParseError("n: expected a positive integer");
    }
    const Index n = doc["n"].get<Index>();
    Matrix m0 = detail::matrix_from_json(doc["m0"], n, "m0");
    Matrix m1 = detail::matrix_from_json(doc["m1"], n, "m1");
    try {
        return Pencil(std::move(m0), std::move(m1));
    } catch (const Error& e) {
        throw ParseError(std::string("pencil JSON: ") + e.what());
    }
}

inline Pencil parse_pencil_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pencil(buf.str());
}

inline Json pencil_to_json(const Pencil& p) {
    Json doc;
    doc["n"] = p.n;
    doc["m0"] = matrix_to_json(p.m0);
    doc["m1"] = matrix_to_json(p.m1);
    return doc;
}

/// Parses a state vector given either as a JSON array (entries real or
/// [re, im]) of the expected length.
inline Vector parse_vector(const std::string& text, Index n) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("u0: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("u0: expected a JSON array");
    if (static_cast<Index>(doc.size()) != n) {
        throw ParseError("u0: has " + std::to_string(doc.size()) + " entries, expected " +
                         std::to_string(n));
    }
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = detail::complex_from_json(doc[static_cast<std::size_t>(i)],
                                         "u0[" + std::to_string(i) + "]");
    }
    return v;
}

/// CSV with header t,re(u_1),im(u_1),...,re(u_n),im(u_n) and one row per
/// time, every value printed with 17 significant digits.
inline std::string trajectory_to_csv(const Trajectory& traj) {
    const Index n = traj.states.empty() ? 0 : traj.states.front().size();
    std::ostringstream out;
    out << "t";
    for (Index j = 1; j <= n; ++j) out << ",re(u_" << j << "),im(u_" << j << ")";
    out << "\n";
    char buf[32];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.16e", x);
        out << buf;
    };
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        put(traj.times[i]);
        const Vector& u = traj.states[i];
        for (Index j = 0; j < n; ++j) {
            out << ",";
            put(u(j).real());
            out << ",";
            put(u(j).imag());
        }
        out << "\n";
    }
    return out.str();
}

/// Full analysis report. Non-regular pencils get a diagnostic instead of the
/// downstream quantities; the rank tolerance used is always echoed.
inline Json analyze_report(const Pencil& p, double rank_tol = -1.0) {
    const auto reg = is_regular(p, rank_tol);
    Json doc;
    doc["n"] = p.n;
    doc["regular"] = reg.regular;
    doc["rank_m0"] = reg.rank;
    doc["sigma_min_b"] = json_real(reg.sigma_min_b);
    doc["rank_tol_threshold"] = json_real(reg.threshold);
    doc["criterion"] = reg.detail;
    if (!reg.regular) return doc;

    const auto f = block_factorize(p, rank_tol);
    const auto srep = spectrum(f);
    const auto iv = compute_iv(f);
    const auto gspec = generator_spectrum(iv);
    const auto structure = iv_structure_predicates(f);

    doc["dim_iv"] = iv.dim();
    doc["iv_basis"] = matrix_to_json(iv.basis.basis);
    doc["b_block"] = matrix_to_json(f.b);
    doc["c_block"] = matrix_to_json(f.c);
    doc["coupling"] = matrix_to_json(iv.coupling);
    doc["spectrum"] = spectrum_to_json(srep.eigenvalues);
    doc["generator_spectrum"] = spectrum_to_json(gspec);
    doc["spectral_abscissa"] = json_real(srep.spectral_abscissa);
    doc["s0"] = json_real(srep.s0);

    // Both lists carry the same sort order, so the pointwise gap bounds the
    // multiset distance for separated spectra.
    double equality = 0.0;
    for (std::size_t i = 0; i < gspec.size(); ++i) {
        equality = std::max(equality, std::abs(gspec[i] - srep.eigenvalues[i]));
    }
    doc["spectral_equality_residual"] = json_real(equality);
    doc["structure"] = {{"nbot_subset_iv", structure.nbot_subset_iv},
                        {"iv_meets_nbot_trivially", structure.iv_meets_nbot_trivially}};
    doc["gram_cond"] = json_real(iv.gram_cond);
    return doc;
}

inline Json stability_report_json(const DichotomyReport& rep) {
    Json doc;
    doc["spectrum"] = spectrum_to_json(rep.spectrum.eigenvalues);
    doc["abscissa"] = json_real(rep.spectrum.spectral_abscissa);
    doc["margin"] = json_real(rep.margin);
    doc["margin_tol"] = json_real(rep.margin_tol);
    doc["verdict"] = to_string(rep.verdict);
    doc["dim_S"] = rep.dim_s();
    doc["dim_T"] = rep.dim_t();
    doc["decay_rate"] = json_real(rep.decay_rate);
    doc["nonnormality_constant"] = json_real(rep.nonnormality_constant);
    return doc;
}

}  // namespace daepencil
