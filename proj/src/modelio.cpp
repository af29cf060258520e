#include "modelio.hpp"

#include <charconv>
#include <fstream>
#include <limits>

#include "error.hpp"
#include "io.hpp"

namespace tsxai {

void ModelFile::put_vec(const std::string& name, std::vector<double> v) {
  Field f;
  f.kind = Field::Kind::Vec;
  f.name = name;
  f.vec = std::move(v);
  fields_.push_back(std::move(f));
}

void ModelFile::put_mat(const std::string& name, Matrix m) {
  Field f;
  f.kind = Field::Kind::Mat;
  f.name = name;
  f.mat = std::move(m);
  fields_.push_back(std::move(f));
}

void ModelFile::put_u64(const std::string& name, uint64_t v) {
  Field f;
  f.kind = Field::Kind::U64;
  f.name = name;
  f.u64 = v;
  fields_.push_back(std::move(f));
}

void ModelFile::put_str(const std::string& name, std::string v) {
  Field f;
  f.kind = Field::Kind::Str;
  f.name = name;
  f.str = std::move(v);
  fields_.push_back(std::move(f));
}

const ModelFile::Field& ModelFile::find(const std::string& name, Field::Kind kind) const {
  for (const auto& f : fields_)
    if (f.name == name) {
      if (f.kind != kind)
        throw DimensionMismatch("model field '" + name + "' has a different kind than requested");
      return f;
    }
  throw DimensionMismatch("model file (type " + type_ + ") is missing field '" + name + "'");
}

bool ModelFile::has(const std::string& name) const {
  for (const auto& f : fields_)
    if (f.name == name) return true;
  return false;
}

const std::vector<double>& ModelFile::vec(const std::string& name) const {
  return find(name, Field::Kind::Vec).vec;
}
const Matrix& ModelFile::mat(const std::string& name) const {
  return find(name, Field::Kind::Mat).mat;
}
uint64_t ModelFile::u64(const std::string& name) const { return find(name, Field::Kind::U64).u64; }
const std::string& ModelFile::str(const std::string& name) const {
  return find(name, Field::Kind::Str).str;
}

int ModelFile::geti(const std::string& name) const {
  uint64_t v = u64(name);
  if (v > static_cast<uint64_t>(std::numeric_limits<int>::max()))
    throw DimensionMismatch("model field '" + name + "' does not fit an int");
  return static_cast<int>(v);
}

void ModelFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "tsxmodel,v1,type=" << type_ << "\n";
  for (const auto& f : fields_) {
    switch (f.kind) {
      case Field::Kind::Vec: {
        out << "field,vec," << f.name << "," << f.vec.size() << "\n";
        for (size_t i = 0; i < f.vec.size(); ++i) {
          if (i) out << ',';
          out << format_double(f.vec[i]);
        }
        out << "\n";
        break;
      }
      case Field::Kind::Mat: {
        out << "field,mat," << f.name << "," << f.mat.rows() << "," << f.mat.cols() << "\n";
        for (int r = 0; r < f.mat.rows(); ++r) {
          for (int c = 0; c < f.mat.cols(); ++c) {
            if (c) out << ',';
            out << format_double(f.mat(r, c));
          }
          out << "\n";
        }
        break;
      }
      case Field::Kind::U64:
        out << "field,u64," << f.name << "\n" << f.u64 << "\n";
        break;
      case Field::Kind::Str:
        out << "field,str," << f.name << "\n" << f.str << "\n";
        break;
    }
  }
  out << "end\n";
  out.flush();
  if (!out.good()) throw IoError("write failed for " + path.string());
}

ModelFile ModelFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  long lineno = 0;
  auto next = [&](std::string& line) {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  auto need = [&](const char* what) {
    std::string line;
    if (!next(line))
      throw ParseError(std::string("unexpected end of file, expected ") + what, lineno + 1);
    return line;
  };

  std::string header = need("tsxmodel header");
  auto fields = split_csv(header);
  if (fields.size() != 3 || fields[0] != "tsxmodel" || fields[1] != "v1" ||
      fields[2].substr(0, 5) != "type=")
    throw ParseError("expected 'tsxmodel,v1,type=<type>' header", lineno);
  ModelFile mf(std::string(fields[2].substr(5)));

  for (;;) {
    std::string line = need("field or end");
    if (line == "end") break;
    auto parts = split_csv(line);
    if (parts.size() < 3 || parts[0] != "field")
      throw ParseError("expected 'field,<kind>,<name>,...' or 'end'", lineno);
    std::string name(parts[2]);
    if (parts[1] == "vec") {
      if (parts.size() != 4) throw ParseError("vec field needs a length", lineno);
      long long n = parse_int(parts[3], lineno);
      if (n < 0) throw ParseError("negative vec length", lineno);
      std::string data = need("vec values");
      auto toks = split_csv(data);
      if (n == 0 && toks.size() == 1 && toks[0].empty()) toks.clear();
      if (static_cast<long long>(toks.size()) != n)
        throw ParseError("vec '" + name + "' expected " + std::to_string(n) + " values", lineno);
      std::vector<double> v(static_cast<size_t>(n));
      for (size_t i = 0; i < v.size(); ++i) v[i] = parse_double(toks[i], lineno);
      mf.put_vec(name, std::move(v));
    } else if (parts[1] == "mat") {
      if (parts.size() != 5) throw ParseError("mat field needs rows,cols", lineno);
      long long r = parse_int(parts[3], lineno), c = parse_int(parts[4], lineno);
      if (r < 1 || c < 1) throw ParseError("mat dimensions out of range", lineno);
      Matrix m(static_cast<int>(r), static_cast<int>(c));
      for (int row = 0; row < m.rows(); ++row) {
        std::string data = need("mat row");
        auto toks = split_csv(data);
        if (static_cast<int>(toks.size()) != m.cols())
          throw ParseError("mat '" + name + "' row has wrong width", lineno);
        for (int col = 0; col < m.cols(); ++col) m(row, col) = parse_double(toks[col], lineno);
      }
      mf.put_mat(name, std::move(m));
    } else if (parts[1] == "u64") {
      std::string data = need("u64 value");
      unsigned long long v = 0;
      auto res = std::from_chars(data.data(), data.data() + data.size(), v);
      if (res.ec != std::errc{} || res.ptr != data.data() + data.size())
        throw ParseError("bad u64 '" + data + "'", lineno);
      mf.put_u64(name, v);
    } else if (parts[1] == "str") {
      mf.put_str(name, need("str value"));
    } else {
      throw ParseError("unknown field kind '" + std::string(parts[1]) + "'", lineno);
    }
  }
  return mf;
}

}  // namespace tsxai
