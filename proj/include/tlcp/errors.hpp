#pragma once

#include <stdexcept>
#include <string>

namespace tlcp {

// Every failure the library raises deliberately derives from Error, so callers
// (and the CLI's exit-code mapping) can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingValue : Error {
    long row;          // 1-based data row (header not counted)
    std::string column;
    MissingValue(long r, std::string col)
        : Error("missing or non-numeric value at row " + std::to_string(r) + ", column \"" + col + "\""),
          row(r), column(std::move(col)) {}
};

struct UnknownColumn : Error {
    std::string column;
    explicit UnknownColumn(std::string col)
        : Error("column \"" + col + "\" not present in header"), column(std::move(col)) {}
};

struct DegenerateColumn : Error {
    std::string column;
    explicit DegenerateColumn(std::string col)
        : Error("column \"" + col + "\" has zero sample variance"), column(std::move(col)) {}
};

struct RankDeficient : Error {
    long rank;  // numerical rank found before the failure
    explicit RankDeficient(long r, const std::string& what = "design matrix is rank deficient")
        : Error(what + " (rank " + std::to_string(r) + ")"), rank(r) {}
};

struct ZeroMatrix : Error {
    ZeroMatrix() : Error("design matrix has no eigenvalue above threshold") {}
};

struct NotOrthogonal : Error {
    double residual;  // max-entry deviation of X'X from scale*I
    explicit NotOrthogonal(double r)
        : Error("design does not satisfy the orthogonality contract (max residual " + std::to_string(r) + ")"),
          residual(r) {}
};

struct TooManyFeatures : Error {
    long k, limit;
    TooManyFeatures(long k_, long limit_)
        : Error("k = " + std::to_string(k_) + " exceeds the enumeration guard of " + std::to_string(limit_)),
          k(k_), limit(limit_) {}
};

struct SingularSystem : Error {
    SingularSystem() : Error("restricted stationarity system is singular") {}
};

struct InsufficientSamples : Error {
    long n, needed;
    InsufficientSamples(long n_, long needed_)
        : Error("have " + std::to_string(n_) + " samples, need more than " + std::to_string(needed_)),
          n(n_), needed(needed_) {}
};

struct ZeroTarget : Error {
    ZeroTarget() : Error("target coefficient estimate has (near) zero norm; relative dissimilarity undefined") {}
};

struct WrongSourceCount : Error {
    long got, want;
    WrongSourceCount(long got_, long want_)
        : Error("expected " + std::to_string(want_) + " source task(s), got " + std::to_string(got_)),
          got(got_), want(want_) {}
};

}  // namespace tlcp
