#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lbpcert/factor_graph.hpp"

namespace lbpcert {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

namespace detail {

class TokenStream {
public:
    explicit TokenStream(std::string_view text) : text_(text) {}

    struct Token {
        std::string_view text;
        std::size_t line;
        std::size_t column;
    };

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    Token next(const char* expecting) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError(std::string("unexpected end of input, expected ") + expecting, line_, col_);
        Token tok{{}, line_, col_};
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_])) {
            ++pos_;
            ++col_;
        }
        tok.text = text_.substr(start, pos_ - start);
        return tok;
    }

    std::size_t next_count(const char* what) {
        Token tok = next(what);
        std::string s(tok.text);
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError(std::string("expected non-negative integer for ") + what + ", got '" + s + "'", tok.line,
                             tok.column);
        errno = 0;
        unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
        if (errno == ERANGE) throw ParseError(std::string("integer out of range for ") + what, tok.line, tok.column);
        return static_cast<std::size_t>(v);
    }

    double next_real(const char* what) {
        Token tok = next(what);
        std::string s(tok.text);
        char* end = nullptr;
        errno = 0;
        double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || s.empty())
            throw ParseError(std::string("expected real number for ") + what + ", got '" + s + "'", tok.line, tok.column);
        if (errno == ERANGE && v != 0.0) throw ParseError(std::string("real out of range for ") + what, tok.line, tok.column);
        if (!std::isfinite(v)) throw ParseError(std::string("non-finite value for ") + what, tok.line, tok.column);
        if (v < 0.0) throw ParseError(std::string("negative value for ") + what, tok.line, tok.column);
        return v;
    }

    std::size_t line() const { return line_; }
    std::size_t column() const { return col_; }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

}  // namespace detail

/// Parses a MARKOV document in UAI layout. Tables are kept exactly as written.
inline FactorGraph parse_uai(std::string_view text) {
    detail::TokenStream ts(text);
    auto header = ts.next("MARKOV header");
    if (header.text != "MARKOV")
        throw ParseError("expected 'MARKOV', got '" + std::string(header.text) + "'", header.line, header.column);

    const std::size_t n = ts.next_count("number of variables");
    std::vector<std::size_t> card(n);
    for (auto& c : card) {
        auto line = ts.line(), col = ts.column();
        c = ts.next_count("cardinality");
        if (c == 0) throw ParseError("zero cardinality", line, col);
    }

    const std::size_t m = ts.next_count("number of factors");
    std::vector<Factor> factors(m);
    std::vector<std::pair<std::size_t, std::size_t>> where(m);
    for (std::size_t f = 0; f < m; ++f) {
        const std::size_t k = ts.next_count("scope size");
        for (std::size_t p = 0; p < k; ++p) {
            auto tok_line = ts.line();
            std::size_t v = ts.next_count("variable id");
            if (v >= n) throw ParseError("variable id " + std::to_string(v) + " out of range", tok_line, ts.column());
            factors[f].scope.push_back(v);
        }
    }
    for (std::size_t f = 0; f < m; ++f) {
        ts.at_end();  // move to the size token so its position is reported
        where[f] = {ts.line(), ts.column()};
        const std::size_t len = ts.next_count("table size");
        std::size_t expected = 1;
        for (VarId v : factors[f].scope) expected *= card[v];
        if (len != expected)
            throw ParseError("factor " + std::to_string(f) + " declares " + std::to_string(len) +
                                 " entries but its scope has " + std::to_string(expected) + " joint states",
                             where[f].first, where[f].second);
        factors[f].table.reserve(len);
        for (std::size_t s = 0; s < len; ++s) factors[f].table.push_back(ts.next_real("table entry"));
    }
    if (!ts.at_end()) {
        auto tok = ts.next("end of input");
        throw ParseError("trailing token '" + std::string(tok.text) + "'", tok.line, tok.column);
    }
    try {
        return FactorGraph(std::move(card), std::move(factors));
    } catch (const ModelError& e) {
        throw ParseError(e.what(), 1, 1);
    }
}

inline FactorGraph load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_uai(buf.str());
}

/// Writes the UAI layout with 17 significant digits, so reading it back is exact.
inline std::string format_uai(const FactorGraph& fg) {
    std::ostringstream out;
    char num[64];
    out << "MARKOV\n" << fg.num_vars() << "\n";
    for (std::size_t v = 0; v < fg.num_vars(); ++v) out << (v ? " " : "") << fg.cardinality(v);
    out << "\n" << fg.num_factors() << "\n";
    for (const Factor& f : fg.factors()) {
        out << f.scope.size();
        for (VarId v : f.scope) out << " " << v;
        out << "\n";
    }
    for (const Factor& f : fg.factors()) {
        out << "\n" << f.table.size() << "\n";
        for (std::size_t s = 0; s < f.table.size(); ++s) {
            std::snprintf(num, sizeof num, "%.17g", f.table[s]);
            out << (s ? " " : "") << num;
        }
        out << "\n";
    }
    return out.str();
}

inline void save_model(const FactorGraph& fg, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
    out << format_uai(fg);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace lbpcert
