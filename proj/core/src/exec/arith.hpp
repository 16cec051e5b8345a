#pragma once

// Scalar semantics shared by both engines so that fills agree bit for bit.

#include "flatq/lang/ast.hpp"

#include <cmath>
#include <cstdint>

namespace flatq::exec::arith {

inline std::int64_t add(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline std::int64_t sub(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
inline std::int64_t mul(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}
inline std::int64_t neg(std::int64_t a) { return static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(a)); }
inline std::int64_t abs(std::int64_t a) { return a < 0 ? neg(a) : a; }

inline double to_f64(std::int64_t v) { return static_cast<double>(v); }

inline std::int64_t apply(lang::BinaryOp op, std::int64_t a, std::int64_t b) {
    switch (op) {
    case lang::BinaryOp::Add: return add(a, b);
    case lang::BinaryOp::Sub: return sub(a, b);
    default: return mul(a, b);
    }
}

inline double apply(lang::BinaryOp op, double a, double b) {
    switch (op) {
    case lang::BinaryOp::Add: return a + b;
    case lang::BinaryOp::Sub: return a - b;
    case lang::BinaryOp::Mul: return a * b;
    default: return a / b;
    }
}

template <class T>
bool compare(lang::BinaryOp op, T a, T b) {
    switch (op) {
    case lang::BinaryOp::Lt: return a < b;
    case lang::BinaryOp::Gt: return a > b;
    case lang::BinaryOp::Le: return a <= b;
    case lang::BinaryOp::Ge: return a >= b;
    case lang::BinaryOp::Eq: return a == b;
    default: return a != b;
    }
}

inline double call(lang::MathFn fn, double x) {
    switch (fn) {
    case lang::MathFn::Sqrt: return std::sqrt(x);
    case lang::MathFn::Cosh: return std::cosh(x);
    case lang::MathFn::Cos: return std::cos(x);
    case lang::MathFn::Sin: return std::sin(x);
    case lang::MathFn::Exp: return std::exp(x);
    case lang::MathFn::Log: return std::log(x);
    case lang::MathFn::Abs: return std::fabs(x);
    }
    return x;
}

}  // namespace flatq::exec::arith
