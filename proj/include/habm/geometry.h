#pragma once

#include <cmath>

namespace habm
{

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b)
    {
        return {a.x + b.x, a.y + b.y};
    }
    friend Vec2 operator-(Vec2 a, Vec2 b)
    {
        return {a.x - b.x, a.y - b.y};
    }
    friend Vec2 operator*(double s, Vec2 a)
    {
        return {s * a.x, s * a.y};
    }
    bool operator==(const Vec2&) const = default;
};

inline double norm(Vec2 v)
{
    return std::hypot(v.x, v.y);
}

inline double distance(Vec2 a, Vec2 b)
{
    return norm(a - b);
}

inline double distance_sq(Vec2 a, Vec2 b)
{
    const Vec2 d = a - b;
    return d.x * d.x + d.y * d.y;
}

} // namespace habm
