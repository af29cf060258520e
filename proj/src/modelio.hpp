#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace tsxai {

// Versioned text container every model sidecar goes through: a type tag plus
// an ordered list of named vectors / matrices / scalars.  Layout:
//   tsxmodel,v1,type=<type>
//   field,vec,<name>,<n>      followed by one CSV line
//   field,mat,<name>,<r>,<c>  followed by r CSV lines
//   field,u64,<name>          followed by one line
//   field,str,<name>          followed by one line
//   end
class ModelFile {
 public:
  ModelFile() = default;
  explicit ModelFile(std::string type) : type_(std::move(type)) {}

  const std::string& type() const { return type_; }

  void put_vec(const std::string& name, std::vector<double> v);
  void put_mat(const std::string& name, Matrix m);
  void put_u64(const std::string& name, uint64_t v);
  void put_str(const std::string& name, std::string v);

  bool has(const std::string& name) const;
  const std::vector<double>& vec(const std::string& name) const;
  const Matrix& mat(const std::string& name) const;
  uint64_t u64(const std::string& name) const;
  const std::string& str(const std::string& name) const;
  int geti(const std::string& name) const;  // u64 narrowed with range check

  void save(const std::filesystem::path& path) const;
  static ModelFile load(const std::filesystem::path& path);

 private:
  struct Field {
    enum class Kind { Vec, Mat, U64, Str } kind;
    std::string name;
    std::vector<double> vec;
    Matrix mat;
    uint64_t u64 = 0;
    std::string str;
  };
  const Field& find(const std::string& name, Field::Kind kind) const;

  std::string type_;
  std::vector<Field> fields_;
};

}  // namespace tsxai
