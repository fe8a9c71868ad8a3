#pragma once

#include <iosfwd>
#include <vector>

namespace symmatch::autodiff {

// Flat binary tensor blob: int32 rows, int32 cols, then rows*cols doubles
// row-major, native byte order.
void write_blob(std::ostream& out, int rows, int cols,
                const std::vector<double>& data);
void read_blob(std::istream& in, int& rows, int& cols,
               std::vector<double>& data);

}  // namespace symmatch::autodiff
