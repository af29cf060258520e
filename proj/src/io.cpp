#include "io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace tsxai {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, long line) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || !std::isfinite(v))
    throw ParseError("bad number '" + std::string(token) + "'", line);
  return v;
}

long long parse_int(std::string_view token, long line) {
  long long v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw ParseError("bad integer '" + std::string(token) + "'", line);
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

namespace {

// Line-oriented reader that tracks 1-based line numbers and tolerates a
// trailing carriage return.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : in_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++lineno_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::string need(const char* what) {
    std::string line;
    if (!next(line)) throw ParseError(std::string("unexpected end of file, expected ") + what,
                                      lineno_ + 1);
    return line;
  }

  long lineno() const { return lineno_; }

  void expect_eof() {
    std::string line;
    while (next(line))
      if (!line.empty()) throw ParseError("unexpected trailing content", lineno_);
  }

 private:
  std::ifstream in_;
  long lineno_ = 0;
};

long long header_field(std::string_view field, std::string_view key, long line) {
  if (field.size() <= key.size() || field.substr(0, key.size()) != key || field[key.size()] != '=')
    throw ParseError("expected '" + std::string(key) + "=<int>', got '" + std::string(field) + "'",
                     line);
  return parse_int(field.substr(key.size() + 1), line);
}

void parse_value_row(const std::string& line, long lineno, Matrix& m, int row) {
  auto tokens = split_csv(line);
  if (static_cast<int>(tokens.size()) != m.cols())
    throw DimensionMismatch("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(m.cols()) + " values, got " +
                            std::to_string(tokens.size()));
  for (int t = 0; t < m.cols(); ++t) m(row, t) = parse_double(tokens[t], lineno);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: we control line endings
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out.good()) throw IoError("write failed for " + path.string());
}

}  // namespace

LabeledDataset read_dataset(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string header = reader.need("mtscsv header");
  auto fields = split_csv(header);
  if (fields.size() != 6 || fields[0] != "mtscsv" || fields[1] != "v1")
    throw ParseError("expected 'mtscsv,v1,d=,L=,n=,classes=' header", reader.lineno());
  int d = static_cast<int>(header_field(fields[2], "d", reader.lineno()));
  int L = static_cast<int>(header_field(fields[3], "L", reader.lineno()));
  int n = static_cast<int>(header_field(fields[4], "n", reader.lineno()));
  int classes = static_cast<int>(header_field(fields[5], "classes", reader.lineno()));
  if (d < 1 || L < 1 || n < 1 || classes < 2)
    throw ParseError("header dimensions out of range", reader.lineno());

  std::vector<MultiSeries> instances;
  std::vector<int> labels;
  instances.reserve(static_cast<size_t>(n));
  labels.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::string line = reader.need("label line");
    auto tokens = split_csv(line);
    if (tokens.size() != 2 || tokens[0] != "label")
      throw ParseError("expected 'label,<int>'", reader.lineno());
    long long label = parse_int(tokens[1], reader.lineno());
    if (label < 0 || label >= classes)
      throw ParseError("label " + std::to_string(label) + " outside [0," +
                       std::to_string(classes) + ")", reader.lineno());
    labels.push_back(static_cast<int>(label));
    Matrix values(d, L);
    for (int c = 0; c < d; ++c) {
      std::string row = reader.need("channel values");
      parse_value_row(row, reader.lineno(), values, c);
    }
    instances.emplace_back(std::move(values));
  }
  reader.expect_eof();
  return LabeledDataset(std::move(instances), std::move(labels), classes, 0, path.stem().string());
}

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "mtscsv,v1,d=" << ds.channels() << ",L=" << ds.length() << ",n=" << ds.size()
      << ",classes=" << ds.n_classes() << "\n";
  for (int i = 0; i < ds.size(); ++i) {
    out << "label," << ds.label(i) << "\n";
    const MultiSeries& inst = ds.instance(i);
    for (int c = 0; c < ds.channels(); ++c) {
      for (int t = 0; t < ds.length(); ++t) {
        if (t) out << ',';
        out << format_double(inst.at(c, t));
      }
      out << "\n";
    }
  }
  finish_out(out, path);
}

SaliencyMap read_saliency(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string header = reader.need("salcsv header");
  auto fields = split_csv(header);
  if (fields.size() != 5 || fields[0] != "salcsv" || fields[1] != "v1")
    throw ParseError("expected 'salcsv,v1,d=,S=,scale=' header", reader.lineno());
  int d = static_cast<int>(header_field(fields[2], "d", reader.lineno()));
  int S = static_cast<int>(header_field(fields[3], "S", reader.lineno()));
  if (d < 1 || S < 1) throw ParseError("header dimensions out of range", reader.lineno());
  Scale scale;
  if (fields[4] == "scale=raw")
    scale = Scale::Raw;
  else if (fields[4] == "scale=0to100")
    scale = Scale::Rescaled0to100;
  else
    throw ParseError("expected scale=raw or scale=0to100", reader.lineno());

  Matrix values(d, S);
  for (int c = 0; c < d; ++c) {
    std::string row = reader.need("saliency values");
    parse_value_row(row, reader.lineno(), values, c);
  }
  reader.expect_eof();
  return SaliencyMap(std::move(values), scale);
}

void write_saliency(const SaliencyMap& w, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "salcsv,v1,d=" << w.channels() << ",S=" << w.segments()
      << ",scale=" << (w.scale() == Scale::Raw ? "raw" : "0to100") << "\n";
  for (int c = 0; c < w.channels(); ++c) {
    for (int s = 0; s < w.segments(); ++s) {
      if (s) out << ',';
      out << format_double(w.at(c, s));
    }
    out << "\n";
  }
  finish_out(out, path);
}

}  // namespace tsxai
