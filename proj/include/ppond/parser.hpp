#pragma once
#include <stdexcept>
#include <string>
#include <utility>

#include "ppond/model.hpp"

namespace ppond {

struct SourceSpan {
    std::string file;
    int line = 0;
    int column = 0;
};

// Syntax or semantic diagnostic carrying a source location. Rendered as
// "file:line:col: message" on standard error by the CLI.
class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan span, const std::string& message)
        : std::runtime_error(span.file + ":" + std::to_string(span.line) + ":" +
                             std::to_string(span.column) + ": " + message),
          span_(std::move(span)) {}

    const SourceSpan& span() const { return span_; }

private:
    SourceSpan span_;
};

// Parses and grounds a domain/problem pair into an invariant-satisfying
// Problem. Grounding enumerates typed-object substitutions for lifted action
// schemas, materializes complement facts, factors out statically-true atoms
// and prunes actions with statically-false preconditions.
Problem parse_problem(const std::string& domain_text, const std::string& problem_text,
                      const std::string& domain_file = "domain",
                      const std::string& problem_file = "problem");

// Emits a grounded problem back into the textual language such that
// parse(serialize(p)) is structurally identical to p.
std::pair<std::string, std::string> serialize_problem(const Problem& p);

bool problems_structurally_equal(const Problem& a, const Problem& b,
                                 std::string* diff = nullptr);

// Stable identity of a problem's grounded content, used in table headers.
uint64_t problem_hash(const Problem& p);

}  // namespace ppond
