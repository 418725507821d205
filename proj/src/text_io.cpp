#include "mmnl/text_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace mmnl {
namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line split into whitespace tokens; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      tokens.clear();
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + what);
  }

  long long to_int(const std::string& tok) const {
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(tok, &used);
    } catch (const std::exception&) {
      fail("expected an integer, got '" + tok + "'");
    }
    if (used != tok.size()) fail("expected an integer, got '" + tok + "'");
    return value;
  }

  double to_double(const std::string& tok) const {
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("expected a number, got '" + tok + "'");
    }
    if (used != tok.size()) fail("expected a number, got '" + tok + "'");
    return value;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_matrix(std::ostream& out, const Matrix& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string> tok;
  if (!reader.next(tok)) reader.fail("missing header 'm n'");
  if (tok.size() != 2) reader.fail("header must be 'm n'");
  const long long rows = reader.to_int(tok[0]);
  const long long cols = reader.to_int(tok[1]);
  if (rows < 0 || cols < 0) reader.fail("negative matrix dimension");
  Matrix out(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    if (!reader.next(tok)) reader.fail("expected " + std::to_string(rows) + " rows, found " +
                                       std::to_string(i));
    if (static_cast<long long>(tok.size()) != cols) {
      reader.fail("expected " + std::to_string(cols) + " values, found " +
                  std::to_string(tok.size()));
    }
    for (long long j = 0; j < cols; ++j) out(i, j) = reader.to_double(tok[j]);
  }
  if (reader.next(tok)) reader.fail("unexpected trailing content");
  return out;
}

void save_matrix(const std::string& path, const Matrix& matrix) {
  std::ofstream out = open_for_write(path);
  write_matrix(out, matrix);
  if (!out) throw IoError("write failed for '" + path + "'");
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in = open_for_read(path);
  try {
    return read_matrix(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_dataset(std::ostream& out, const ChoiceDataset& data) {
  out << data.num_types() << ' ' << data.num_items() << ' ' << data.size() << '\n';
  for (std::size_t t = 0; t < data.size(); ++t) {
    const ObservationView obs = data[t];
    out << obs.type_index << ' ' << obs.chosen_item << ' ' << obs.assortment.size();
    for (const int j : obs.assortment) out << ' ' << j;
    out << '\n';
  }
}

ChoiceDataset read_dataset(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string> tok;
  if (!reader.next(tok)) reader.fail("missing header 'm n T'");
  if (tok.size() != 3) reader.fail("header must be 'm n T'");
  const long long m = reader.to_int(tok[0]);
  const long long n = reader.to_int(tok[1]);
  const long long count = reader.to_int(tok[2]);
  if (m < 1 || n < 1 || count < 0) reader.fail("invalid dimensions in header");
  ChoiceDataset data(static_cast<int>(m), static_cast<int>(n));
  std::vector<int> assortment;
  for (long long t = 0; t < count; ++t) {
    if (!reader.next(tok)) {
      reader.fail("expected " + std::to_string(count) + " observations, found " +
                  std::to_string(t));
    }
    if (tok.size() < 3) reader.fail("observation needs 'i j k' followed by k items");
    const long long k = reader.to_int(tok[2]);
    if (k < 1 || static_cast<long long>(tok.size()) != 3 + k) {
      reader.fail("assortment size " + tok[2] + " does not match the " +
                  std::to_string(tok.size() - 3) + " listed items");
    }
    assortment.clear();
    for (long long q = 0; q < k; ++q) {
      const long long item = reader.to_int(tok[3 + q]);
      if (q > 0 && item <= assortment.back()) reader.fail("assortment items must be ascending");
      assortment.push_back(static_cast<int>(item));
    }
    try {
      data.add(static_cast<int>(reader.to_int(tok[0])), static_cast<int>(reader.to_int(tok[1])),
               assortment);
    } catch (const DomainError& e) {
      reader.fail(e.what());
    }
  }
  if (reader.next(tok)) reader.fail("unexpected trailing content");
  return data;
}

void save_dataset(const std::string& path, const ChoiceDataset& data) {
  std::ofstream out = open_for_write(path);
  write_dataset(out, data);
  if (!out) throw IoError("write failed for '" + path + "'");
}

ChoiceDataset load_dataset(const std::string& path) {
  std::ifstream in = open_for_read(path);
  try {
    return read_dataset(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace mmnl
