#include "imbed/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "imbed/errors.hpp"

namespace imbed {

using nlohmann::json;

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

json complex_to_json(Complex z) {
    return json::array({z.real(), z.imag()});
}

json operator_to_json(const DiscreteOperator& op) {
    json entries = json::array();
    for (Index i = 0; i < op.dim(); ++i) {
        for (Index j = 0; j < op.dim(); ++j) {
            entries.push_back(complex_to_json(op(i, j)));
        }
    }
    return json{{"dim", op.dim()}, {"entries", std::move(entries)}};
}

DiscreteOperator operator_from_json(const json& j) {
    try {
        const auto dim = j.at("dim").get<Index>();
        const json& entries = j.at("entries");
        if (dim < 1 || !entries.is_array() || static_cast<Index>(entries.size()) != dim * dim) {
            throw ConfigError("operator dump: entries must hold dim*dim [re, im] pairs");
        }
        Matrix m(dim, dim);
        for (Index k = 0; k < dim * dim; ++k) {
            const json& e = entries.at(static_cast<std::size_t>(k));
            if (!e.is_array() || e.size() != 2) {
                throw ConfigError("operator dump: every entry must be an [re, im] pair");
            }
            m(k / dim, k % dim) = Complex(e[0].get<double>(), e[1].get<double>());
        }
        return DiscreteOperator(m);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("operator dump: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("operator dump: ") + e.what());
    }
}

void write_trajectory_csv(std::ostream& out, const std::vector<ImbeddingState>& states) {
    out << "lambda_re,lambda_im,d_re,d_im,residual,step_size\n";
    for (const auto& s : states) {
        out << format_number(s.lambda.real()) << ',' << format_number(s.lambda.imag()) << ','
            << format_number(s.d.real()) << ',' << format_number(s.d.imag()) << ','
            << format_number(s.residual) << ',' << format_number(s.step_size) << '\n';
    }
}

json trajectory_json(const std::vector<ImbeddingState>& states, const std::vector<ImbeddingState>& snapshots) {
    json samples = json::array();
    for (const auto& s : states) {
        samples.push_back({{"lambda", complex_to_json(s.lambda)},
                           {"d", complex_to_json(s.d)},
                           {"residual", s.residual},
                           {"step_size", s.step_size}});
    }
    json snaps = json::array();
    for (const auto& s : snapshots) {
        snaps.push_back({{"lambda", complex_to_json(s.lambda)},
                         {"d", complex_to_json(s.d)},
                         {"D", operator_to_json(s.D)}});
    }
    return json{{"samples", std::move(samples)}, {"snapshots", std::move(snaps)}};
}

void write_branch_csv(std::ostream& out, const std::vector<ContinuationState>& states) {
    out << "lambda,branch_id,d_lin_re,d_lin_im,amplitude,newton_iters\n";
    for (const auto& s : states) {
        out << format_number(s.lambda) << ',' << s.branch_id << ',' << format_number(s.d_lin.real()) << ','
            << format_number(s.d_lin.imag()) << ',' << format_number(s.psi.norm()) << ',' << s.newton_iters
            << '\n';
    }
}

json branch_json(const std::vector<ContinuationState>& states) {
    json out = json::array();
    for (const auto& s : states) {
        json psi = json::array();
        for (Index i = 0; i < s.psi.size(); ++i) {
            psi.push_back(complex_to_json(s.psi(i)));
        }
        out.push_back({{"lambda", s.lambda},
                       {"branch_id", s.branch_id},
                       {"d_lin", complex_to_json(s.d_lin)},
                       {"amplitude", s.psi.norm()},
                       {"newton_iters", s.newton_iters},
                       {"residual", s.residual},
                       {"psi", std::move(psi)}});
    }
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << text;
    out.close();
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

} // namespace imbed
