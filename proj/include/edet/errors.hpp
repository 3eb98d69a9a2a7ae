#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edet {

/// Malformed input row; `row` is the 1-based line number in the source stream.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t row, const std::string& msg)
        : std::runtime_error("row " + std::to_string(row) + ": " + msg), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Dimension disagreement between tensors or between tensors and a config.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values where finite ones are required (checked construction).
class TensorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Feature-spec fitting or validation failure.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelIoErrc {
    bad_magic,
    bad_version,
    truncated,
    bad_shape,
    bad_checksum,
    corrupt_data,
};

inline const char* to_string(ModelIoErrc c) {
    switch (c) {
    case ModelIoErrc::bad_magic: return "bad_magic";
    case ModelIoErrc::bad_version: return "bad_version";
    case ModelIoErrc::truncated: return "truncated";
    case ModelIoErrc::bad_shape: return "bad_shape";
    case ModelIoErrc::bad_checksum: return "bad_checksum";
    case ModelIoErrc::corrupt_data: return "corrupt_data";
    }
    return "unknown";
}

class ModelIoError : public std::runtime_error {
public:
    ModelIoError(ModelIoErrc code, const std::string& msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
    ModelIoErrc code() const { return code_; }

private:
    ModelIoErrc code_;
};

/// Non-finite loss during an update; carries the batch element that produced it.
class NonFiniteLoss : public std::runtime_error {
public:
    explicit NonFiniteLoss(std::size_t batch_index)
        : std::runtime_error("non-finite loss at batch element " + std::to_string(batch_index)),
          batch_index_(batch_index) {}
    std::size_t batch_index() const { return batch_index_; }

private:
    std::size_t batch_index_;
};

class TrainError : public std::runtime_error {
public:
    TrainError(int epoch, const std::string& msg)
        : std::runtime_error("epoch " + std::to_string(epoch) + ": " + msg), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

class MonitorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model was trained against a different feature spec than the one supplied.
class DigestMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace edet
