#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "crpd/moment_model.hpp"

namespace crpd {

// Strict comma-separated parser: UTF-8, one header row naming the columns,
// every body cell a finite number. CRLF endings are accepted; a trailing
// newline is optional. Raises ParseError with the offending row and column,
// NonNumericCell for bad cells, EmptyFile when there is no header or no
// body row.
Dataset parse_csv_text(std::string_view text, const std::string& origin);
Dataset parse_csv(const std::string& path);

// Cells are written as shortest round-trip decimal strings, so
// parse(write(dataset)) reproduces the dataset exactly.
void write_csv(const Dataset& data, std::ostream& out);
std::string write_csv_string(const Dataset& data);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

// Gate for the bundled milk-production fixture: 22 records with columns
// (cow_id, milk_lbs, days, mpd), mpd consistent with milk_lbs / days, and
// the documented summary statistics of mpd (mean 12.4250, sd 3.0750,
// min 7.5470, max 18.6610 within 1e-4). Throws DataError on any violation.
void validate_owen_fixture(const Dataset& data);

}  // namespace crpd
