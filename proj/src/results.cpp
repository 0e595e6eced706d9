#include "schedopt/results.hpp"

#include <charconv>
#include <iterator>
#include <ostream>
#include <sstream>

namespace schedopt {

namespace {

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void append(std::string& line, const std::string& field) {
    if (!line.empty()) line += ',';
    line += quote(field);
}

/// Splits CSV text into rows of fields, honouring quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool pending = false;  // a row has been started
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        pending = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            pending = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw ValidationError("results: unterminated quoted field");
    if (pending) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

double parse_double(const std::string& text, std::size_t line, const char* column) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("results line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
    return v;
}

}  // namespace

std::string csv_header(const SearchSpace& space) {
    std::string line = "iteration";
    for (const auto& p : space.parameters()) append(line, p.name());
    for (const char* name : {"objective", "feasible", "phase", "timestamp"}) append(line, name);
    return line;
}

std::string csv_row(const SearchSpace& space, const EvaluationRecord& record) {
    std::string line = std::to_string(record.iteration);
    for (std::size_t i = 0; i < space.dimension(); ++i) append(line, to_string(record.configuration.values[i]));
    line += ',';
    if (record.objective) line += format_number(*record.objective);
    append(line, record.feasible ? "true" : "false");
    append(line, std::string(to_string(record.phase)));
    append(line, format_number(record.timestamp));
    return line;
}

ResultsWriter::ResultsWriter(const SearchSpace& space, const std::string& path) : space_(space), out_(path) {
    if (!out_) throw Error("cannot open '" + path + "' for writing");
    out_ << csv_header(space_) << '\n' << std::flush;
}

void ResultsWriter::write(const EvaluationRecord& record) {
    out_ << csv_row(space_, record) << '\n' << std::flush;
    if (!out_) throw Error("failed writing results");
}

void write_results(const SearchSpace& space, std::span<const EvaluationRecord> history, std::ostream& out) {
    out << csv_header(space) << '\n';
    for (const auto& r : history) out << csv_row(space, r) << '\n';
    out.flush();
}

void write_results(const SearchSpace& space, std::span<const EvaluationRecord> history, const std::string& path) {
    ResultsWriter writer(space, path);
    for (const auto& r : history) writer.write(r);
}

std::vector<EvaluationRecord> read_results(const SearchSpace& space, std::istream& in) {
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto rows = parse_csv(text);
    if (rows.empty()) throw ValidationError("results: missing header");
    const auto expected = parse_csv(csv_header(space) + "\n").front();
    if (rows.front() != expected) throw ValidationError("results: header does not match the search space");

    const std::size_t d = space.dimension();
    std::vector<EvaluationRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() != expected.size())
            throw ValidationError("results line " + std::to_string(line) + ": expected " +
                                  std::to_string(expected.size()) + " fields, got " + std::to_string(row.size()));
        EvaluationRecord rec;
        std::uint64_t iteration = 0;
        auto res = std::from_chars(row[0].data(), row[0].data() + row[0].size(), iteration);
        if (res.ec != std::errc() || res.ptr != row[0].data() + row[0].size())
            throw ValidationError("results line " + std::to_string(line) + ": bad iteration '" + row[0] + "'");
        rec.iteration = iteration;
        for (std::size_t i = 0; i < d; ++i) {
            auto v = parse_value(space.parameter(i), row[1 + i]);
            if (!v)
                throw ValidationError("results line " + std::to_string(line) + ": bad value '" + row[1 + i] +
                                      "' for parameter '" + space.parameter(i).name() + "'");
            rec.configuration.values.push_back(std::move(*v));
        }
        const auto& feasible = row[d + 2];
        if (feasible != "true" && feasible != "false")
            throw ValidationError("results line " + std::to_string(line) + ": bad feasible flag '" + feasible + "'");
        rec.feasible = feasible == "true";
        if (!row[d + 1].empty()) rec.objective = parse_double(row[d + 1], line, "objective");
        if (rec.feasible != rec.objective.has_value())
            throw ValidationError("results line " + std::to_string(line) +
                                  ": objective must be present exactly when feasible");
        const auto& phase = row[d + 3];
        if (phase != "doe" && phase != "bo")
            throw ValidationError("results line " + std::to_string(line) + ": bad phase '" + phase + "'");
        rec.phase = phase == "doe" ? Phase::doe : Phase::bo;
        rec.timestamp = parse_double(row[d + 4], line, "timestamp");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<EvaluationRecord> read_results(const SearchSpace& space, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_results(space, in);
}

}  // namespace schedopt
