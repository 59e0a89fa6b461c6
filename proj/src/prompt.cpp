#include "nesy/prompt.hpp"

#include "nesy/errors.hpp"
#include "nesy/text.hpp"

namespace nesy {

namespace {

constexpr std::array<std::string_view, kSegmentCount> kNames = {
    "static_context", "dynamic_context", "operation", "examples", "template", "payload", "user_input",
};

constexpr std::array<std::string_view, kSegmentCount> kHeaders = {
    "[STATIC CONTEXT]", "[DYNAMIC CONTEXT]", "[OPERATION]", "[EXAMPLES]", "[TEMPLATE]", "[PAYLOAD]", "[INPUT]",
};

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
    return n;
}

std::string render_range(const EngineRequest& req, std::size_t first, std::size_t last) {
    std::string out;
    for (std::size_t i = first; i < last; ++i) {
        if (req.segments[i].empty()) continue;
        if (!out.empty()) out += "\n\n";
        out += kHeaders[i];
        out += '\n';
        out += req.segments[i];
    }
    return out;
}

}  // namespace

bool is_dsl_line(std::string_view line) {
    auto n = count_occurrences(line, "=>");
    if (n != 1) return false;
    auto pos = line.find("=>");
    return !text::trim(line.substr(0, pos)).empty();
}

void PromptSpec::validate() const {
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (!is_dsl_line(examples[i])) {
            throw ConstraintViolation("example " + std::to_string(i) + " is not an 'input =>output' line: " +
                                      examples[i]);
        }
    }
    if (output_template && count_occurrences(*output_template, kTemplatePlaceholder) != 1) {
        throw ConstraintViolation("template must contain exactly one " + std::string(kTemplatePlaceholder) +
                                  " placeholder");
    }
}

std::string_view segment_name(Segment s) { return kNames[static_cast<std::size_t>(s)]; }

std::size_t EngineRequest::non_empty_segments() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.empty() ? 0 : 1;
    return n;
}

EngineRequest compose_request(const SymbolNode& node, const PromptSpec& spec,
                              const std::optional<std::string>& payload, std::string user_input) {
    spec.validate();
    EngineRequest req;
    req[Segment::static_context] = node.static_context;
    req[Segment::dynamic_context] = node.dynamic_context;
    req[Segment::operation] = spec.operation;
    req[Segment::examples] = text::join(spec.examples, "\n");
    if (spec.output_template) req[Segment::output_template] = *spec.output_template;
    if (payload) req[Segment::payload] = *payload;
    req[Segment::user_input] = std::move(user_input);
    req.stop = spec.stop_markers;
    return req;
}

std::string render_system(const EngineRequest& req) { return render_range(req, 0, 5); }

std::string render_user(const EngineRequest& req) { return render_range(req, 5, kSegmentCount); }

std::string render_request(const EngineRequest& req) { return render_range(req, 0, kSegmentCount); }

std::size_t estimate_tokens(std::string_view s) { return text::split_whitespace(s).size() * 133 / 100; }

std::size_t estimate_context(const EngineRequest& req) {
    std::size_t total = 0;
    for (const auto& s : req.segments) total += estimate_tokens(s);
    return total;
}

}  // namespace nesy
