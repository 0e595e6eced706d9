#pragma once

#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "schedopt/record.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// CSV layout: iteration,<parameter names...>,objective,feasible,phase,timestamp.
/// Numbers use the shortest round-trip form, permutations are `;`-joined,
/// feasibility is true/false, and infeasible rows leave the objective empty.
/// Fields holding a comma, quote or line break are quoted.
std::string csv_header(const SearchSpace& space);
std::string csv_row(const SearchSpace& space, const EvaluationRecord& record);

/// Streams records to a CSV file, flushing after every row so an aborted run
/// leaves a readable prefix.
class ResultsWriter {
public:
    /// Truncates `path` and writes the header. Throws Error if it cannot be opened.
    ResultsWriter(const SearchSpace& space, const std::string& path);

    void write(const EvaluationRecord& record);

private:
    SearchSpace space_;
    std::ofstream out_;
};

void write_results(const SearchSpace& space, std::span<const EvaluationRecord> history, const std::string& path);
void write_results(const SearchSpace& space, std::span<const EvaluationRecord> history, std::ostream& out);

/// Parses CSV produced by the writer. Throws ValidationError on a header that
/// does not match `space` or a malformed row.
std::vector<EvaluationRecord> read_results(const SearchSpace& space, std::istream& in);
std::vector<EvaluationRecord> read_results(const SearchSpace& space, const std::string& path);

}  // namespace schedopt
