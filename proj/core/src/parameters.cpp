// core/src/parameters.cpp

// Copyright 2026  fac contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fac/parameters.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "fac/error.hpp"

namespace fac::nn {

Parameter &ParameterSet::add(const std::string &name, Matrix init) {
  if (contains(name)) throw ValidationError("duplicate parameter " + name);
  params_.push_back(Parameter{name, std::move(init), Matrix()});
  auto &p = params_.back();
  p.grad = Matrix::Zero(p.value.rows(), p.value.cols());
  return p;
}

bool ParameterSet::contains(const std::string &name) const {
  for (const auto &p : params_)
    if (p.name == name) return true;
  return false;
}

Parameter &ParameterSet::at(const std::string &name) {
  for (auto &p : params_)
    if (p.name == name) return p;
  throw NotFoundError("no parameter named " + name);
}

const Parameter &ParameterSet::at(const std::string &name) const {
  for (const auto &p : params_)
    if (p.name == name) return p;
  throw NotFoundError("no parameter named " + name);
}

Index ParameterSet::num_scalars() const {
  Index n = 0;
  for (const auto &p : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto &p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

uint64_t ParameterSet::checksum() const {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void *data, size_t n) {
    const auto *b = static_cast<const unsigned char *>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto &p : params_) {
    mix(p.name.data(), p.name.size());
    const Index dims[2] = {p.value.rows(), p.value.cols()};
    mix(dims, sizeof(dims));
    mix(p.value.data(), sizeof(double) * static_cast<size_t>(p.value.size()));
  }
  return h;
}

std::vector<Matrix> ParameterSet::snapshot() const {
  std::vector<Matrix> out;
  out.reserve(params_.size());
  for (const auto &p : params_) out.push_back(p.value);
  return out;
}

void ParameterSet::restore(const std::vector<Matrix> &values) {
  if (values.size() != params_.size())
    throw ShapeError("snapshot has " + std::to_string(values.size()) +
                     " tensors, model has " + std::to_string(params_.size()));
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != params_[i].value.rows() ||
        values[i].cols() != params_[i].value.cols())
      throw ShapeError("snapshot shape mismatch for " + params_[i].name);
    params_[i].value = values[i];
  }
}

namespace {
constexpr char kMagic[8] = {'F', 'A', 'C', 'P', 'A', 'R', 'M', '1'};

template <typename T>
void put(std::ofstream &out, T v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
template <typename T>
T take(const std::vector<char> &buf, size_t &pos, const std::string &where) {
  if (pos + sizeof(T) > buf.size())
    throw IntegrityError(where + ": truncated parameter blob");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}
}  // namespace

void ParameterSet::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<uint64_t>(out, params_.size());
  for (const auto &p : params_) {
    put<uint64_t>(out, p.name.size());
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<uint64_t>(out, static_cast<uint64_t>(p.value.rows()));
    put<uint64_t>(out, static_cast<uint64_t>(p.value.cols()));
    out.write(reinterpret_cast<const char *>(p.value.data()),
              static_cast<std::streamsize>(sizeof(double) * p.value.size()));
  }
  if (!out) throw IoError("short write to " + path.string());
}

void ParameterSet::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (buf.size() < sizeof(kMagic) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw IntegrityError(where + ": not a parameter blob");
  size_t pos = sizeof(kMagic);
  const auto count = take<uint64_t>(buf, pos, where);
  if (count != params_.size())
    throw ShapeError(where + ": blob has " + std::to_string(count) +
                     " parameters, model declares " +
                     std::to_string(params_.size()));
  std::vector<Matrix> values;
  for (uint64_t i = 0; i < count; ++i) {
    const auto len = take<uint64_t>(buf, pos, where);
    if (pos + len > buf.size()) throw IntegrityError(where + ": truncated name");
    std::string name(buf.data() + pos, len);
    pos += len;
    const auto rows = take<uint64_t>(buf, pos, where);
    const auto cols = take<uint64_t>(buf, pos, where);
    const auto &p = params_[i];
    if (name != p.name || Index(rows) != p.value.rows() ||
        Index(cols) != p.value.cols())
      throw ShapeError(where + ": parameter " + name + " does not match " +
                       p.name);
    const size_t bytes = sizeof(double) * rows * cols;
    if (pos + bytes > buf.size())
      throw IntegrityError(where + ": truncated values for " + name);
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::memcpy(m.data(), buf.data() + pos, bytes);
    pos += bytes;
    values.push_back(std::move(m));
  }
  if (pos != buf.size()) throw IntegrityError(where + ": trailing bytes");
  restore(values);
}

}  // namespace fac::nn
