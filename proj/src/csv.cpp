#include "edet/csv.hpp"

#include <algorithm>

namespace edet {

int Schema::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

int Schema::label_index() const { return column_index(label_column); }

void Schema::validate() const {
    if (columns.empty())
        throw SpecError("schema has no columns");
    if (label_index() < 0)
        throw SpecError("label column '" + label_column + "' not in schema");
    for (std::size_t i = 0; i < columns.size(); ++i)
        for (std::size_t j = i + 1; j < columns.size(); ++j)
            if (columns[i] == columns[j])
                throw SpecError("duplicate schema column '" + columns[i] + "'");
}

std::vector<std::string> split_delimited(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"' && cell.empty()) {
            quoted = true;
        } else if (c == delim) {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

namespace {

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

CsvReader::CsvReader(std::istream& in, const Schema& schema)
    : in_(in), schema_(schema), header_pending_(schema.has_header) {}

std::optional<PacketRecord> CsvReader::next() {
    std::string line;
    for (;;) {
        if (!std::getline(in_, line))
            return std::nullopt;
        ++line_;
        if (header_pending_) {
            header_pending_ = false;
            continue;
        }
        if (strip(line).empty())
            continue; // blank lines between records are tolerated
        break;
    }

    auto cells = split_delimited(line, schema_.delimiter);
    if (static_cast<int>(cells.size()) != schema_.width())
        throw ParseError(line_, "expected " + std::to_string(schema_.width()) + " columns, got " +
                                    std::to_string(cells.size()));

    PacketRecord rec;
    std::string label_cell = strip(cells[static_cast<std::size_t>(schema_.label_index())]);
    if (label_cell == "0")
        rec.label = 0;
    else if (label_cell == "1")
        rec.label = 1;
    else
        throw ParseError(line_, "label must be 0 or 1, got '" + label_cell + "'");
    rec.values = std::move(cells);
    return rec;
}

std::vector<PacketRecord> parse_records(std::istream& in, const Schema& schema) {
    schema.validate();
    CsvReader reader(in, schema);
    std::vector<PacketRecord> records;
    while (auto rec = reader.next())
        records.push_back(std::move(*rec));
    return records;
}

void write_records_csv(const std::vector<PacketRecord>& records, const Schema& schema,
                       std::ostream& out) {
    if (schema.has_header) {
        for (int i = 0; i < schema.width(); ++i) {
            if (i) out << schema.delimiter;
            out << schema.columns[static_cast<std::size_t>(i)];
        }
        out << '\n';
    }
    for (const auto& rec : records) {
        for (std::size_t i = 0; i < rec.values.size(); ++i) {
            if (i) out << schema.delimiter;
            out << rec.values[i];
        }
        out << '\n';
    }
}

} // namespace edet
