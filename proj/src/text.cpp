#include "nesy/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace nesy::text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < s.size()) out.emplace_back(s.substr(start));
            break;
        }
        auto line = s.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.emplace_back(line);
        start = nl + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::optional<double> parse_number(std::string_view s) {
    auto t = trim(s);
    if (t.empty()) return std::nullopt;
    auto lower = to_lower(t);
    if (lower == "inf" || lower == "+inf" || lower == "infinity") return std::numeric_limits<double>::infinity();
    if (lower == "-inf" || lower == "-infinity") return -std::numeric_limits<double>::infinity();
    std::string_view body = t;
    if (body.front() == '+') body.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
    if (std::isnan(v)) return std::nullopt;
    return v;
}

std::string quote(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\\' || c == '\'') out += '\\';
        out += c;
    }
    out += '\'';
    return out;
}

std::string render_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += quote(items[i]);
    }
    out += ']';
    return out;
}

std::optional<std::vector<std::string>> parse_list(std::string_view s) {
    auto t = trim(s);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') return std::nullopt;
    std::string_view body(t);
    body = body.substr(1, body.size() - 2);
    std::vector<std::string> items;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < body.size() && is_space(body[i])) ++i;
    };
    skip_ws();
    if (i == body.size()) return items;
    while (true) {
        skip_ws();
        if (i >= body.size()) return std::nullopt;
        std::string item;
        char q = body[i];
        if (q == '\'' || q == '"') {
            ++i;
            bool closed = false;
            while (i < body.size()) {
                char c = body[i++];
                if (c == '\\' && i < body.size()) {
                    item += body[i++];
                } else if (c == q) {
                    closed = true;
                    break;
                } else {
                    item += c;
                }
            }
            if (!closed) return std::nullopt;
        } else {
            std::size_t j = i;
            while (j < body.size() && body[j] != ',') ++j;
            item = trim(body.substr(i, j - i));
            if (item.empty()) return std::nullopt;
            i = j;
        }
        items.push_back(std::move(item));
        skip_ws();
        if (i == body.size()) break;
        if (body[i] != ',') return std::nullopt;
        ++i;
    }
    return items;
}

}  // namespace nesy::text
