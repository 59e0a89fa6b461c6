#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace nesy::vertex {

enum class Role { generated, reference, random };

std::string_view role_name(Role r);
Role parse_role(std::string_view name);

/// Row-major collection of equal-length finite vectors.
class SampleSet {
public:
    explicit SampleSet(std::size_t dim, Role role = Role::generated);
    static SampleSet from_rows(const std::vector<std::vector<double>>& rows, Role role = Role::generated);

    void add(std::span<const double> v);

    std::size_t size() const { return dim_ ? data_.size() / dim_ : 0; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return data_.empty(); }
    Role role() const { return role_; }
    std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    const std::vector<double>& data() const { return data_; }

    /// Rows [first, last) as a new set.
    SampleSet slice(std::size_t first, std::size_t last) const;
    /// This set followed by `other`.
    SampleSet concat(const SampleSet& other) const;

private:
    std::size_t dim_;
    Role role_;
    std::vector<double> data_;
};

struct LabeledSamples {
    SampleSet generated;
    SampleSet reference;
    SampleSet random;
};

/// JSONL sidecar: one {"role": ..., "vector": [...]} object per line.
LabeledSamples read_samples_jsonl(const std::filesystem::path& path);
void write_samples_jsonl(const std::filesystem::path& path, const LabeledSamples& samples);

}  // namespace nesy::vertex
