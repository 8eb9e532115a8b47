#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "events.hpp"
#include "rational.hpp"

namespace cfbounds {

namespace detail {

template <class P>
double as_double(const P& p) {
    if constexpr (std::is_same_v<P, Rational>) {
        return p.to_double();
    } else {
        return p;
    }
}

}  // namespace detail

// Joint probability table over a fixed variable list. Cells are stored in
// the enumeration order of the variables (first variable slowest); P is
// double or Rational.
template <class P>
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<Variable> vars, std::vector<P> probs)
        : vars_(std::move(vars)), probs_(std::move(probs)) {
        std::size_t total = 1;
        for (const auto& v : vars_) {
            detail::validate_variable(v);
            total *= v.domain.size();
        }
        if (probs_.size() != total) {
            throw std::invalid_argument("Distribution over " + std::to_string(total) +
                                        " cells given " + std::to_string(probs_.size()) + " probabilities");
        }
        P sum{0};
        for (const auto& p : probs_) {
            if (p < P{0}) throw std::invalid_argument("Distribution has a negative probability");
            sum += p;
        }
        if constexpr (std::is_same_v<P, Rational>) {
            if (sum != P{1}) {
                throw std::invalid_argument("Distribution probabilities sum to " + sum.to_string() +
                                            ", expected 1");
            }
        } else {
            if (std::abs(sum - 1.0) > 1e-9) {
                throw std::invalid_argument("Distribution probabilities sum to " + std::to_string(sum) +
                                            ", expected 1");
            }
        }
    }

    const std::vector<Variable>& vars() const { return vars_; }
    const std::vector<P>& cells() const { return probs_; }

    // Marginal probability of a (possibly partial) assignment.
    P prob(const Assignment& a) const {
        for (const auto& [var, val] : a) {
            const auto& v = variable(var);
            if (std::find(v.domain.begin(), v.domain.end(), val) == v.domain.end()) {
                throw std::invalid_argument("Value '" + val + "' is not in the domain of '" + var + "'");
            }
        }
        P sum{0};
        std::vector<std::size_t> idx(vars_.size(), 0);
        for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
            bool match = true;
            for (std::size_t i = 0; i < vars_.size(); ++i) {
                const auto it = a.find(vars_[i].name);
                if (it != a.end() && vars_[i].domain[idx[i]] != it->second) {
                    match = false;
                    break;
                }
            }
            if (match) sum += probs_[cell];
            for (std::size_t i = vars_.size(); i-- > 0;) {
                if (++idx[i] < vars_[i].domain.size()) break;
                idx[i] = 0;
            }
        }
        return sum;
    }

    // P(cube | given); empty optional when the conditioning event has
    // probability zero.
    std::optional<P> conditional(const Assignment& cube, const Assignment& given) const {
        const P den = prob(given);
        if (den == P{0}) return std::nullopt;
        Assignment joint = cube;
        for (const auto& [var, val] : given) {
            const auto it = joint.find(var);
            if (it != joint.end() && it->second != val) return P{0};
            joint.insert({var, val});
        }
        return prob(joint) / den;
    }

private:
    const Variable& variable(const std::string& name) const {
        for (const auto& v : vars_) {
            if (v.name == name) return v;
        }
        throw std::out_of_range("Variable '" + name + "' not found in the distribution");
    }

    std::vector<Variable> vars_;
    std::vector<P> probs_;
};

using NumericDistribution = DiscreteDistribution<double>;
using ExactDistribution = DiscreteDistribution<Rational>;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        std::size_t b = 0;
        std::size_t e = field.size();
        while (b < e && std::isspace(static_cast<unsigned char>(field[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(field[e - 1]))) --e;
        out.push_back(field.substr(b, e - b));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

template <class P>
P parse_prob(const std::string& text) {
    if constexpr (std::is_same_v<P, Rational>) {
        return Rational::parse(text);
    } else {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("Cannot parse probability '" + text + "'");
        return v;
    }
}

}  // namespace detail

// Reads a joint distribution from CSV with one column per variable and a
// final "p" column. Missing assignments default to probability zero;
// repeating one is an error. The variable list supplies domains and the
// storage order.
template <class P>
DiscreteDistribution<P> load_distribution_csv(const std::vector<Variable>& vars, std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("Distribution file is empty");
    const auto header = detail::split_csv_line(line);
    if (header.empty() || header.back() != "p") {
        throw std::invalid_argument("Distribution header must end with a 'p' column");
    }
    std::vector<std::size_t> col_var(header.size() - 1);
    std::vector<bool> seen_var(vars.size(), false);
    for (std::size_t c = 0; c + 1 < header.size(); ++c) {
        bool found = false;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i].name == header[c]) {
                if (seen_var[i]) {
                    throw std::invalid_argument("Distribution header repeats variable '" + header[c] + "'");
                }
                seen_var[i] = true;
                col_var[c] = i;
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("Distribution header has unknown variable '" + header[c] + "'");
    }
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!seen_var[i]) throw std::invalid_argument("Distribution header is missing variable '" + vars[i].name + "'");
    }

    std::size_t total = 1;
    std::vector<std::size_t> stride(vars.size(), 1);
    for (std::size_t i = vars.size(); i-- > 0;) {
        stride[i] = total;
        total *= vars[i].domain.size();
    }
    std::vector<P> probs(total, P{0});
    std::vector<bool> seen_cell(total, false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument("Distribution line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        }
        std::size_t cell = 0;
        for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
            const auto& v = vars[col_var[c]];
            const auto it = std::find(v.domain.begin(), v.domain.end(), fields[c]);
            if (it == v.domain.end()) {
                throw std::invalid_argument("Distribution line " + std::to_string(line_no) + ": value '" +
                                            fields[c] + "' is not in the domain of '" + v.name + "'");
            }
            cell += stride[col_var[c]] * static_cast<std::size_t>(it - v.domain.begin());
        }
        if (seen_cell[cell]) {
            throw std::invalid_argument("Distribution line " + std::to_string(line_no) +
                                        " repeats an assignment");
        }
        seen_cell[cell] = true;
        probs[cell] = detail::parse_prob<P>(fields.back());
    }
    return DiscreteDistribution<P>(vars, std::move(probs));
}

template <class P>
DiscreteDistribution<P> load_distribution_csv(const std::vector<Variable>& vars, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("Cannot open file '" + path + "'");
    return load_distribution_csv<P>(vars, in);
}

// Writes the table back out, skipping zero cells; Rational cells print
// exactly.
template <class P>
void write_distribution_csv(const DiscreteDistribution<P>& dist, std::ostream& out) {
    for (const auto& v : dist.vars()) out << v.name << ",";
    out << "p\n";
    const auto& vars = dist.vars();
    std::vector<std::size_t> idx(vars.size(), 0);
    for (std::size_t cell = 0; cell < dist.cells().size(); ++cell) {
        const P& p = dist.cells()[cell];
        if (!(p == P{0})) {
            for (std::size_t i = 0; i < vars.size(); ++i) out << vars[i].domain[idx[i]] << ",";
            if constexpr (std::is_same_v<P, Rational>) {
                out << p.to_string() << "\n";
            } else {
                std::ostringstream fmt;
                fmt.precision(17);
                fmt << p;
                out << fmt.str() << "\n";
            }
        }
        for (std::size_t i = vars.size(); i-- > 0;) {
            if (++idx[i] < vars[i].domain.size()) break;
            idx[i] = 0;
        }
    }
}

}  // namespace cfbounds
