#include "symmatch/autodiff/serialize.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace symmatch::autodiff {

void write_blob(std::ostream& out, int rows, int cols,
                const std::vector<double>& data) {
  if (static_cast<long>(data.size()) != static_cast<long>(rows) * cols)
    throw std::runtime_error("tensor blob: data length does not match shape");
  int32_t r = rows, c = cols;
  out.write(reinterpret_cast<const char*>(&r), sizeof(r));
  out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("tensor blob: write failed");
}

void read_blob(std::istream& in, int& rows, int& cols,
               std::vector<double>& data) {
  int32_t r = 0, c = 0;
  in.read(reinterpret_cast<char*>(&r), sizeof(r));
  in.read(reinterpret_cast<char*>(&c), sizeof(c));
  if (!in || r < 0 || c < 0) throw std::runtime_error("tensor blob: bad header");
  data.resize(static_cast<size_t>(r) * static_cast<size_t>(c));
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!in) throw std::runtime_error("tensor blob: truncated data");
  rows = r;
  cols = c;
}

}  // namespace symmatch::autodiff
