#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nesy/symbol.hpp"

namespace nesy {

/// Output scaffold slot. A template carries exactly one of these.
inline constexpr std::string_view kTemplatePlaceholder = "{{...}}";

/// True when `line` is a few-shot example of the form "input =>output".
bool is_dsl_line(std::string_view line);

struct PromptSpec {
    std::string operation;
    std::vector<std::string> examples;
    std::optional<std::string> output_template;
    std::vector<std::string> stop_markers;

    /// Throws ConstraintViolation on a malformed example line or template.
    void validate() const;
};

enum class Segment : std::size_t {
    static_context = 0,
    dynamic_context,
    operation,
    examples,
    output_template,
    payload,
    user_input,
};

inline constexpr std::size_t kSegmentCount = 7;

std::string_view segment_name(Segment s);

enum class Target { completion, embedding };

struct DecodeParams {
    double temperature = 0.0;
    int max_tokens = 512;
    std::uint64_t seed = 0;
};

/// A prompt laid out in the fixed segment order static context, dynamic
/// context, operation, examples, template, payload, user input.
struct EngineRequest {
    std::array<std::string, kSegmentCount> segments;
    Target target = Target::completion;
    DecodeParams decode;
    std::vector<std::string> stop;

    const std::string& operator[](Segment s) const { return segments[static_cast<std::size_t>(s)]; }
    std::string& operator[](Segment s) { return segments[static_cast<std::size_t>(s)]; }
    std::size_t non_empty_segments() const;
};

EngineRequest compose_request(const SymbolNode& node, const PromptSpec& spec,
                              const std::optional<std::string>& payload, std::string user_input);

/// Instruction part of the prompt (static context through template).
std::string render_system(const EngineRequest& req);
/// Data part of the prompt (payload and user input).
std::string render_user(const EngineRequest& req);
/// Both parts; the canonical text form of a request.
std::string render_request(const EngineRequest& req);

/// Whitespace-split word count times 1.33, rounded down.
std::size_t estimate_tokens(std::string_view text);
/// Sum of the per-segment estimates. Monotone; zero for an empty request.
std::size_t estimate_context(const EngineRequest& req);

}  // namespace nesy
