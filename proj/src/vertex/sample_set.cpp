#include "nesy/vertex/sample_set.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nesy/errors.hpp"

namespace nesy::vertex {

std::string_view role_name(Role r) {
    switch (r) {
        case Role::generated: return "generated";
        case Role::reference: return "reference";
        case Role::random: return "random";
    }
    return "generated";
}

Role parse_role(std::string_view name) {
    if (name == "generated") return Role::generated;
    if (name == "reference") return Role::reference;
    if (name == "random") return Role::random;
    throw ArgumentError("unknown sample role '" + std::string(name) + "'");
}

SampleSet::SampleSet(std::size_t dim, Role role) : dim_(dim), role_(role) {
    if (dim == 0) throw ArgumentError("sample dimension must be positive");
}

SampleSet SampleSet::from_rows(const std::vector<std::vector<double>>& rows, Role role) {
    if (rows.empty()) throw ArgumentError("sample set needs at least one row");
    SampleSet s(rows.front().size(), role);
    for (const auto& r : rows) s.add(r);
    return s;
}

void SampleSet::add(std::span<const double> v) {
    if (v.size() != dim_) {
        throw ArgumentError("sample has dimension " + std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    }
    for (double x : v) {
        if (!std::isfinite(x)) throw ArgumentError("sample entry is not finite");
    }
    data_.insert(data_.end(), v.begin(), v.end());
}

SampleSet SampleSet::slice(std::size_t first, std::size_t last) const {
    if (first > last || last > size()) throw ArgumentError("slice out of range");
    SampleSet s(dim_, role_);
    s.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                   data_.begin() + static_cast<std::ptrdiff_t>(last * dim_));
    return s;
}

SampleSet SampleSet::concat(const SampleSet& other) const {
    if (other.dim_ != dim_) throw ArgumentError("cannot concatenate sample sets of different dimension");
    SampleSet s = *this;
    s.data_.insert(s.data_.end(), other.data_.begin(), other.data_.end());
    return s;
}

LabeledSamples read_samples_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open sample file " + path.string());
    std::vector<std::vector<double>> rows[3];
    std::string line;
    std::size_t lineno = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("role") || !j.contains("vector") ||
            !j["role"].is_string() || !j["vector"].is_array()) {
            throw ParseError(lineno, "expected {\"role\": ..., \"vector\": [...]}");
        }
        std::vector<double> v;
        for (const auto& x : j["vector"]) {
            if (!x.is_number()) throw ParseError(lineno, "vector entry is not a number");
            v.push_back(x.get<double>());
        }
        if (v.empty()) throw ParseError(lineno, "empty vector");
        if (dim == 0) dim = v.size();
        if (v.size() != dim) throw ParseError(lineno, "vector dimension differs from earlier lines");
        Role role;
        try {
            role = parse_role(j["role"].get<std::string>());
        } catch (const ArgumentError& e) {
            throw ParseError(lineno, e.what());
        }
        rows[static_cast<int>(role)].push_back(std::move(v));
    }
    if (dim == 0) throw ArgumentError("sample file " + path.string() + " is empty");
    auto build = [&](Role r) {
        SampleSet s(dim, r);
        for (const auto& v : rows[static_cast<int>(r)]) s.add(v);
        return s;
    };
    return {build(Role::generated), build(Role::reference), build(Role::random)};
}

void write_samples_jsonl(const std::filesystem::path& path, const LabeledSamples& samples) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write sample file " + path.string());
    for (const auto* set : {&samples.generated, &samples.reference, &samples.random}) {
        for (std::size_t i = 0; i < set->size(); ++i) {
            auto row = (*set)[i];
            nlohmann::json j{{"role", role_name(set->role())},
                             {"vector", std::vector<double>(row.begin(), row.end())}};
            out << j.dump() << '\n';
        }
    }
}

}  // namespace nesy::vertex
