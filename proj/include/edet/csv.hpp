#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "edet/errors.hpp"

namespace edet {

/// Column layout of a packet-record CSV. Parsing is positional; names exist so
/// feature selection can refer to columns symbolically.
struct Schema {
    std::vector<std::string> columns;
    std::string label_column;
    char delimiter = ',';
    bool has_header = false;

    int width() const { return static_cast<int>(columns.size()); }
    int column_index(const std::string& name) const;
    int label_index() const;
    void validate() const; // throws SpecError
};

/// One parsed dataset row: every raw cell plus the decoded binary label.
struct PacketRecord {
    std::vector<std::string> values;
    int label = 0; // 0 = normal, 1 = attack
};

/// Incremental reader. next() throws ParseError on a malformed row but leaves
/// the reader usable, so callers may skip bad rows and keep going.
class CsvReader {
public:
    CsvReader(std::istream& in, const Schema& schema);
    std::optional<PacketRecord> next();
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    const Schema& schema_;
    std::size_t line_ = 0;
    bool header_pending_;
};

std::vector<std::string> split_delimited(const std::string& line, char delim);

std::vector<PacketRecord> parse_records(std::istream& in, const Schema& schema);

void write_records_csv(const std::vector<PacketRecord>& records, const Schema& schema,
                       std::ostream& out);

} // namespace edet
