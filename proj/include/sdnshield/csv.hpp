#pragma once

#include <string>
#include <vector>

namespace sdnshield {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column after trimming, or -1.
  int column(const std::string& name) const;
};

// Reads a comma-separated file with a header row. Cells are trimmed; quoting
// is not supported (none of the formats handled here need it). Blank lines
// are skipped. Throws UserError when the file cannot be opened or a row has
// a different field count than the header.
CsvTable read_csv(const std::string& path);

}  // namespace sdnshield
