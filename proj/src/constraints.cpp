#include "nesy/constraints.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include "nesy/errors.hpp"
#include "nesy/text.hpp"

namespace nesy {

std::string to_text(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return x;
            } else if constexpr (std::is_same_v<T, bool>) {
                return x ? "True" : "False";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else {
                return text::format_number(x);
            }
        },
        v);
}

Constraint Constraint::cast_to(CastTarget target) {
    Constraint c;
    c.kind = Kind::type_cast;
    c.cast = target;
    return c;
}

Constraint Constraint::range(double lo, double hi) {
    Constraint c;
    c.kind = Kind::range;
    c.lo = lo;
    c.hi = hi;
    return c;
}

Constraint Constraint::grammar_of(std::string name) {
    if (name != "json") throw ArgumentError("unsupported grammar '" + name + "' (only json is available)");
    Constraint c;
    c.kind = Kind::grammar;
    c.grammar = std::move(name);
    return c;
}

Constraint Constraint::predicate(std::function<bool(const Value&)> fn, std::string message) {
    Constraint c;
    c.kind = Kind::predicate;
    c.check = std::move(fn);
    c.failure_message = std::move(message);
    return c;
}

std::string Constraint::describe() const {
    if (!failure_message.empty()) return failure_message;
    switch (kind) {
        case Kind::type_cast: {
            static constexpr const char* names[] = {"text", "integer", "real", "boolean"};
            return std::string("cast to ") + names[static_cast<int>(cast)];
        }
        case Kind::range:
            return "range [" + text::format_number(lo) + ", " + text::format_number(hi) + "]";
        case Kind::grammar:
            return "grammar " + grammar;
        case Kind::predicate:
            return "predicate";
    }
    return "constraint";
}

namespace {

std::optional<Value> cast_value(const Value& v, CastTarget target) {
    auto s = text::trim(to_text(v));
    switch (target) {
        case CastTarget::text:
            return Value{to_text(v)};
        case CastTarget::integer: {
            std::int64_t out = 0;
            std::string_view body = s;
            if (!body.empty() && body.front() == '+') body.remove_prefix(1);
            auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), out);
            if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
            return Value{out};
        }
        case CastTarget::real: {
            auto d = text::parse_number(s);
            if (!d) return std::nullopt;
            return Value{*d};
        }
        case CastTarget::boolean: {
            auto lower = text::to_lower(s);
            if (!lower.empty() && lower.back() == '.') lower.pop_back();
            if (lower == "true" || lower == "yes") return Value{true};
            if (lower == "false" || lower == "no") return Value{false};
            return std::nullopt;
        }
    }
    return std::nullopt;
}

bool holds(const Constraint& c, Value& current) {
    switch (c.kind) {
        case Constraint::Kind::type_cast: {
            auto cast = cast_value(current, c.cast);
            if (!cast) return false;
            current = std::move(*cast);
            return true;
        }
        case Constraint::Kind::range: {
            std::optional<double> x;
            if (const auto* i = std::get_if<std::int64_t>(&current)) x = static_cast<double>(*i);
            else if (const auto* d = std::get_if<double>(&current)) x = *d;
            else if (const auto* s = std::get_if<std::string>(&current)) x = text::parse_number(*s);
            return x && *x >= c.lo && *x <= c.hi;
        }
        case Constraint::Kind::grammar:
            return json_grammar_accepts(to_text(current));
        case Constraint::Kind::predicate:
            return c.check && c.check(current);
    }
    return false;
}

// Recursive-descent recognizer over raw bytes.
class JsonRecognizer {
public:
    explicit JsonRecognizer(std::string_view s) : s_(s) {}

    bool accept() {
        ws();
        if (!value(0)) return false;
        ws();
        return i_ == s_.size();
    }

private:
    static constexpr int kMaxDepth = 512;

    bool eof() const { return i_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[i_]; }

    void ws() {
        while (!eof() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) ++i_;
    }

    bool literal(std::string_view lit) {
        if (s_.substr(i_, lit.size()) != lit) return false;
        i_ += lit.size();
        return true;
    }

    bool value(int depth) {
        if (depth > kMaxDepth || eof()) return false;
        switch (peek()) {
            case '{': return object(depth + 1);
            case '[': return array(depth + 1);
            case '"': return string();
            case 't': return literal("true");
            case 'f': return literal("false");
            case 'n': return literal("null");
            default: return number();
        }
    }

    bool object(int depth) {
        ++i_;
        ws();
        if (peek() == '}') {
            ++i_;
            return true;
        }
        while (true) {
            ws();
            if (peek() != '"' || !string()) return false;
            ws();
            if (peek() != ':') return false;
            ++i_;
            ws();
            if (!value(depth)) return false;
            ws();
            if (peek() == ',') {
                ++i_;
                continue;
            }
            if (peek() == '}') {
                ++i_;
                return true;
            }
            return false;
        }
    }

    bool array(int depth) {
        ++i_;
        ws();
        if (peek() == ']') {
            ++i_;
            return true;
        }
        while (true) {
            ws();
            if (!value(depth)) return false;
            ws();
            if (peek() == ',') {
                ++i_;
                continue;
            }
            if (peek() == ']') {
                ++i_;
                return true;
            }
            return false;
        }
    }

    static bool is_hex(char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
    }
    static int hex_val(char c) {
        if (c <= '9') return c - '0';
        if (c <= 'F') return c - 'A' + 10;
        return c - 'a' + 10;
    }

    bool hex4(unsigned& out) {
        if (i_ + 4 > s_.size()) return false;
        out = 0;
        for (int k = 0; k < 4; ++k) {
            char c = s_[i_++];
            if (!is_hex(c)) return false;
            out = out * 16 + static_cast<unsigned>(hex_val(c));
        }
        return true;
    }

    bool utf8_sequence() {
        auto b0 = static_cast<unsigned char>(s_[i_]);
        std::size_t len = 0;
        unsigned char lo = 0x80, hi = 0xBF;
        if (b0 >= 0xC2 && b0 <= 0xDF) len = 2;
        else if (b0 == 0xE0) { len = 3; lo = 0xA0; }
        else if (b0 >= 0xE1 && b0 <= 0xEC) len = 3;
        else if (b0 == 0xED) { len = 3; hi = 0x9F; }
        else if (b0 >= 0xEE && b0 <= 0xEF) len = 3;
        else if (b0 == 0xF0) { len = 4; lo = 0x90; }
        else if (b0 >= 0xF1 && b0 <= 0xF3) len = 4;
        else if (b0 == 0xF4) { len = 4; hi = 0x8F; }
        else return false;
        if (i_ + len > s_.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto b = static_cast<unsigned char>(s_[i_ + k]);
            unsigned char l = k == 1 ? lo : 0x80;
            unsigned char h = k == 1 ? hi : 0xBF;
            if (b < l || b > h) return false;
        }
        i_ += len;
        return true;
    }

    bool string() {
        ++i_;
        while (!eof()) {
            auto c = static_cast<unsigned char>(s_[i_]);
            if (c == '"') {
                ++i_;
                return true;
            }
            if (c < 0x20) return false;
            if (c == '\\') {
                ++i_;
                if (eof()) return false;
                char e = s_[i_++];
                if (e == 'u') {
                    unsigned cp = 0;
                    if (!hex4(cp)) return false;
                    if (cp >= 0xD800 && cp <= 0xDBFF) {
                        // high surrogate must pair with a low one
                        if (!literal("\\u")) return false;
                        unsigned low = 0;
                        if (!hex4(low) || low < 0xDC00 || low > 0xDFFF) return false;
                    } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
                        return false;
                    }
                } else if (std::string_view("\"\\/bfnrt").find(e) == std::string_view::npos) {
                    return false;
                }
                continue;
            }
            if (c < 0x80) {
                ++i_;
                continue;
            }
            if (!utf8_sequence()) return false;
        }
        return false;
    }

    bool digits() {
        std::size_t start = i_;
        while (!eof() && peek() >= '0' && peek() <= '9') ++i_;
        return i_ > start;
    }

    bool number() {
        const std::size_t start = i_;
        if (!number_token()) return false;
        // Tokens that overflow a double are grammatical but cannot be read by
        // ordinary parsers; reject them so acceptance implies parseability.
        const std::string token(s_.substr(start, i_ - start));
        return std::isfinite(std::strtod(token.c_str(), nullptr));
    }

    bool number_token() {
        if (peek() == '-') ++i_;
        if (peek() == '0') {
            ++i_;
        } else if (peek() >= '1' && peek() <= '9') {
            digits();
        } else {
            return false;
        }
        if (peek() == '.') {
            ++i_;
            if (!digits()) return false;
        }
        if (peek() == 'e' || peek() == 'E') {
            ++i_;
            if (peek() == '+' || peek() == '-') ++i_;
            if (!digits()) return false;
        }
        return true;
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

}  // namespace

Value apply_constraints(std::string_view value, const std::vector<Constraint>& constraints,
                        const std::optional<Value>& fallback) {
    Value current{std::string(value)};
    for (const auto& c : constraints) {
        if (holds(c, current)) continue;
        if (fallback) return *fallback;
        throw ConstraintViolation("constraint violated: " + c.describe() + " (value: " + std::string(value) + ")");
    }
    return current;
}

bool json_grammar_accepts(std::string_view s) { return JsonRecognizer(s).accept(); }

std::string strip_whitespace(std::string_view s) { return text::trim(s); }

std::string strip_code_fence(std::string_view s) {
    auto t = text::trim(s);
    if (t.rfind("```", 0) != 0) return t;
    auto first_nl = t.find('\n');
    if (first_nl == std::string::npos) return t;
    auto close = t.rfind("```");
    if (close == std::string::npos || close <= first_nl) return t;
    return text::trim(std::string_view(t).substr(first_nl + 1, close - first_nl - 1));
}

}  // namespace nesy
