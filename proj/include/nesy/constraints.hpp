#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nesy {

/// Result of casting engine output to a declared return type.
using Value = std::variant<std::string, std::int64_t, double, bool>;

std::string to_text(const Value& v);

enum class CastTarget { text, integer, real, boolean };

struct Constraint {
    enum class Kind { type_cast, range, grammar, predicate };

    Kind kind = Kind::predicate;
    CastTarget cast = CastTarget::text;
    double lo = 0.0;
    double hi = 0.0;
    std::string grammar;
    std::function<bool(const Value&)> check;
    std::string failure_message;

    static Constraint cast_to(CastTarget target);
    static Constraint range(double lo, double hi);
    /// Only "json" is recognized.
    static Constraint grammar_of(std::string name);
    static Constraint predicate(std::function<bool(const Value&)> fn, std::string message);

    std::string describe() const;
};

/// Runs the constraints in order. The first failure yields `fallback` if
/// one is given, otherwise a ConstraintViolation naming that constraint.
Value apply_constraints(std::string_view value, const std::vector<Constraint>& constraints,
                        const std::optional<Value>& fallback = std::nullopt);

/// RFC 8259 recognizer (UTF-8 validated, top-level scalars allowed).
bool json_grammar_accepts(std::string_view s);

std::string strip_whitespace(std::string_view s);
/// Removes a surrounding ``` fence (with optional language tag).
std::string strip_code_fence(std::string_view s);

}  // namespace nesy
