#ifndef KSENT_SERIALIZE_HPP
#define KSENT_SERIALIZE_HPP

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ksent/errors.hpp"
#include "ksent/measure.hpp"

namespace ksent {

using Json = nlohmann::json;

/// Decimal rendering with 17 significant digits; parses back to the same double.
inline std::string format_decimal(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Accepts a decimal string or a JSON number.
inline double parse_decimal(const Json& v) {
    if (v.is_number()) return v.get<double>();
    require(v.is_string(), "expected a decimal string or number");
    const std::string s = v.get<std::string>();
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    // ERANGE on underflow still yields the nearest subnormal, which is the value we want
    require(!s.empty() && end == s.c_str() + s.size() && !(errno == ERANGE && std::isinf(x)),
            "malformed decimal \"" + s + "\"");
    return x;
}

namespace detail {

inline Json decimal_array(std::span<const double> xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(format_decimal(x));
    return a;
}

inline std::vector<double> read_decimals(const Json& a, const std::string& field) {
    require(a.is_array(), "field \"" + field + "\" must be an array");
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& v : a) out.push_back(parse_decimal(v));
    return out;
}

inline const Json& field(const Json& doc, const char* name) {
    require(doc.is_object() && doc.contains(name), std::string("measure document lacks \"") + name + "\"");
    return doc.at(name);
}

}  // namespace detail

/// Measure document:
///   {"kind": "bernoulli", "alphabet_size": K, "weights": ["0.5", ...]}
///   {"kind": "markov", "alphabet_size": K, "order": r, "kernel": [[row], ...], "stationary": [...]}
///   {"kind": "factor", "alphabet_size": q, "coding": [..], "source": {measure document}}
inline Json to_document(const StationaryMeasure& m) {
    Json doc;
    doc["kind"] = to_string(m.kind());
    doc["alphabet_size"] = m.alphabet_size();
    if (const auto* b = m.as_bernoulli()) {
        doc["weights"] = detail::decimal_array(b->weights());
    } else if (const auto* mk = m.as_markov()) {
        doc["order"] = mk->order();
        Json rows = Json::array();
        for (WordIndex w = 0; w < mk->memory_words(); ++w) rows.push_back(detail::decimal_array(mk->row(w)));
        doc["kernel"] = std::move(rows);
        doc["stationary"] = detail::decimal_array(mk->stationary().probs());
    } else {
        const auto* f = m.as_factor();
        doc["coding"] = std::vector<Symbol>(f->coding().begin(), f->coding().end());
        doc["source"] = to_document(f->source());
    }
    return doc;
}

inline StationaryMeasure from_document(const Json& doc) {
    const std::string kind = detail::field(doc, "kind").get<std::string>();
    const auto k = detail::field(doc, "alphabet_size").get<std::size_t>();
    if (kind == "bernoulli") {
        auto w = detail::read_decimals(detail::field(doc, "weights"), "weights");
        require(w.size() == k, "weights length differs from alphabet_size");
        return bernoulli_from_weights(std::move(w));
    }
    if (kind == "markov") {
        const auto order = detail::field(doc, "order").get<std::size_t>();
        const Json& rows = detail::field(doc, "kernel");
        require(rows.is_array(), "kernel must be an array of rows");
        std::vector<double> kernel;
        for (const auto& row : rows) {
            auto r = detail::read_decimals(row, "kernel");
            require(r.size() == k, "kernel row length differs from alphabet_size");
            kernel.insert(kernel.end(), r.begin(), r.end());
        }
        if (doc.contains("stationary")) {
            auto pi = detail::read_decimals(doc.at("stationary"), "stationary");
            return markov_with_stationary(k, order, std::move(kernel), BlockDistribution(k, order, std::move(pi)));
        }
        return markov_from_kernel(k, order, std::move(kernel));
    }
    if (kind == "factor") {
        auto coding = detail::field(doc, "coding").get<std::vector<Symbol>>();
        auto source = from_document(detail::field(doc, "source"));
        auto m = factor_of(source, std::move(coding));
        require(m.alphabet_size() == k, "coding image size differs from alphabet_size");
        return m;
    }
    throw InvalidInput("unknown measure kind \"" + kind + "\"");
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

inline StationaryMeasure load_measure(const std::string& path) {
    try {
        return from_document(read_json_file(path));
    } catch (const Json::exception& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

inline void save_measure(const StationaryMeasure& m, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot write " + path);
    out << to_document(m).dump(2) << '\n';
}

}  // namespace ksent

#endif
