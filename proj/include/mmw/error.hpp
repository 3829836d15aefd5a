// Copyright 2026, The mmwave-recog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmw {

/// Broad failure classes. The CLI maps each to a distinct exit status.
enum class ErrorKind {
  InvalidConfig,  // exit 2
  Data,           // exit 3
  Io,             // exit 4
  Shape,          // programming error inside the engine
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::InvalidConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::Shape, what) {}
  ShapeError(const std::string& where, std::size_t expected, std::size_t actual)
      : Error(ErrorKind::Shape, where + ": expected size " + std::to_string(expected) + ", got " +
                                    std::to_string(actual)) {}
};

class UnknownLabelError : public DataError {
 public:
  explicit UnknownLabelError(std::string label)
      : DataError("unknown label '" + label + "'"), label_(std::move(label)) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

/// CSV problems. `line` is 1-based; `column` is empty for malformed rows.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::string column, const std::string& what)
      : DataError("line " + std::to_string(line) + (column.empty() ? "" : ", column '" + column + "'") +
                  ": " + what),
        line_(line),
        column_(std::move(column)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

class MissingFileError : public DataError {
 public:
  explicit MissingFileError(std::string path) : DataError("missing file: " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class InconsistentLabelsetError : public DataError {
 public:
  using DataError::DataError;
};

class ClassTooSmallError : public DataError {
 public:
  explicit ClassTooSmallError(std::string cls)
      : DataError("class '" + cls + "' has fewer than 2 examples"), cls_(std::move(cls)) {}
  const std::string& class_name() const noexcept { return cls_; }

 private:
  std::string cls_;
};

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

class TooFewRowsError : public DataError {
 public:
  TooFewRowsError(std::size_t rows, std::size_t window)
      : DataError("recording has " + std::to_string(rows) + " rows, window needs " + std::to_string(window)) {}
};

class MissingDomainError : public DataError {
 public:
  explicit MissingDomainError(std::string domain)
      : DataError("domain not present in data: " + domain), domain_(std::move(domain)) {}
  const std::string& domain() const noexcept { return domain_; }

 private:
  std::string domain_;
};

class CorruptFileError : public DataError {
 public:
  CorruptFileError(std::size_t offset, const std::string& what)
      : DataError("corrupt file at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class VersionMismatchError : public DataError {
 public:
  VersionMismatchError(long long found, long long expected)
      : DataError("schema_version " + std::to_string(found) + " not supported (expected " +
                  std::to_string(expected) + ")") {}
};

}  // namespace mmw
