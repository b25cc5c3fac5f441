#include "praline/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <unordered_set>

#include "praline/symexpr.hpp"

namespace praline {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-10;

struct StdForm {
    int m = 0, n = 0;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
};

StdForm standard(const Polytope& p) {
    StdForm s;
    int slacks = 0;
    for (auto& r : p.rows)
        if (r.sense != '=') ++slacks;
    s.n = p.dim + slacks;
    s.m = static_cast<int>(p.rows.size());
    int k = p.dim;
    for (auto& r : p.rows) {
        std::vector<double> row(s.n, 0.0);
        for (int j = 0; j < p.dim && j < static_cast<int>(r.a.size()); ++j) row[j] = r.a[j];
        if (r.sense == '<') row[k++] = 1.0;
        if (r.sense == '>') row[k++] = -1.0;
        double rhs = r.rhs;
        if (rhs < 0) {
            for (auto& x : row) x = -x;
            rhs = -rhs;
        }
        s.A.push_back(std::move(row));
        s.b.push_back(rhs);
    }
    return s;
}

// Dense tableau: rows 0..m-1 constraints, row m objective (reduced costs, rhs = -z).
struct Tableau {
    int m, n;
    std::vector<std::vector<double>> t;
    std::vector<int> basis;

    void pivot(int r, int c) {
        double pv = t[r][c];
        for (auto& x : t[r]) x /= pv;
        t[r][c] = 1.0;
        for (int i = 0; i <= m; ++i) {
            if (i == r) continue;
            double f = t[i][c];
            if (f == 0.0) continue;
            for (int j = 0; j <= n; ++j) t[i][j] -= f * t[r][j];
            t[i][c] = 0.0;
        }
        basis[r] = c;
    }

    void set_costs(const std::vector<double>& c) {
        auto& obj = t[m];
        std::fill(obj.begin(), obj.end(), 0.0);
        for (int j = 0; j < n; ++j) obj[j] = c[j];
        for (int i = 0; i < m; ++i) {
            double cb = c[basis[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j <= n; ++j) obj[j] -= cb * t[i][j];
        }
    }

    // returns false if unbounded; `allowed` masks columns that may enter
    bool optimize(const std::vector<char>& allowed) {
        for (long iter = 0; iter < 1000000; ++iter) {
            int enter = -1;
            for (int j = 0; j < n; ++j)
                if (allowed[j] && t[m][j] < -kCostEps) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            double best = 0;
            for (int i = 0; i < m; ++i) {
                if (t[i][enter] > kPivotEps) {
                    double ratio = t[i][n] / t[i][enter];
                    if (leave < 0 || ratio < best - 1e-12 ||
                        (ratio <= best + 1e-12 && basis[i] < basis[leave])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        return true;
    }
};

// Phase 1 on a standard form. On success returns a tableau over the original columns with
// redundant rows removed, in a feasible basis.
bool phase1(const StdForm& s, Tableau& out) {
    Tableau tb;
    tb.m = s.m;
    tb.n = s.n + s.m;
    tb.t.assign(tb.m + 1, std::vector<double>(tb.n + 1, 0.0));
    tb.basis.resize(tb.m);
    for (int i = 0; i < s.m; ++i) {
        for (int j = 0; j < s.n; ++j) tb.t[i][j] = s.A[i][j];
        tb.t[i][s.n + i] = 1.0;
        tb.t[i][tb.n] = s.b[i];
        tb.basis[i] = s.n + i;
    }
    std::vector<double> c(tb.n, 0.0);
    for (int i = 0; i < s.m; ++i) c[s.n + i] = 1.0;
    tb.set_costs(c);
    std::vector<char> allowed(tb.n, 1);
    tb.optimize(allowed);
    if (-tb.t[tb.m][tb.n] > 1e-9) return false;

    std::vector<char> drop(tb.m, 0);
    for (int i = 0; i < tb.m; ++i) {
        if (tb.basis[i] < s.n) continue;
        int col = -1;
        double best = kPivotEps;
        for (int j = 0; j < s.n; ++j)
            if (std::fabs(tb.t[i][j]) > best) {
                best = std::fabs(tb.t[i][j]);
                col = j;
            }
        if (col < 0)
            drop[i] = 1;
        else
            tb.pivot(i, col);
    }
    out.m = 0;
    out.n = s.n;
    out.t.clear();
    out.basis.clear();
    for (int i = 0; i < tb.m; ++i) {
        if (drop[i]) continue;
        std::vector<double> row(tb.t[i].begin(), tb.t[i].begin() + s.n);
        row.push_back(std::max(0.0, tb.t[i][tb.n]));
        out.t.push_back(std::move(row));
        out.basis.push_back(tb.basis[i]);
        ++out.m;
    }
    out.t.push_back(std::vector<double>(s.n + 1, 0.0));
    return true;
}

}  // namespace

LpResult solve_lp(const Polytope& p, const std::vector<double>& c, bool maximize) {
    LpResult res;
    StdForm s = standard(p);
    Tableau tb;
    if (!phase1(s, tb)) {
        res.status = LpStatus::Infeasible;
        return res;
    }
    std::vector<double> cost(s.n, 0.0);
    for (int j = 0; j < p.dim && j < static_cast<int>(c.size()); ++j) cost[j] = maximize ? -c[j] : c[j];
    tb.set_costs(cost);
    std::vector<char> allowed(s.n, 1);
    if (!tb.optimize(allowed)) {
        res.status = LpStatus::Unbounded;
        return res;
    }
    res.status = LpStatus::Optimal;
    res.x.assign(p.dim, 0.0);
    for (int i = 0; i < tb.m; ++i)
        if (tb.basis[i] < p.dim) res.x[tb.basis[i]] = std::max(0.0, tb.t[i][tb.n]);
    double v = 0;
    for (int j = 0; j < p.dim && j < static_cast<int>(c.size()); ++j) v += c[j] * res.x[j];
    res.value = v;
    return res;
}

LpResult feasible_point(const Polytope& p) { return solve_lp(p, std::vector<double>(p.dim, 0.0), false); }

bool satisfies(const Polytope& p, const std::vector<double>& x, double tol) {
    for (double v : x)
        if (v < -tol) return false;
    for (auto& r : p.rows) {
        double s = 0;
        for (int j = 0; j < p.dim && j < static_cast<int>(r.a.size()); ++j) s += r.a[j] * x[j];
        if (r.sense == '=' && std::fabs(s - r.rhs) > tol) return false;
        if (r.sense == '<' && s > r.rhs + tol) return false;
        if (r.sense == '>' && s < r.rhs - tol) return false;
    }
    return true;
}

std::vector<std::vector<double>> enumerate_vertices(const Polytope& p, int max_cols, size_t max_bases) {
    StdForm s = standard(p);
    if (s.n > max_cols || s.n > 64)
        throw CapExceeded("vertex enumeration needs " + std::to_string(s.n) + " columns");
    Tableau start;
    if (!phase1(s, start)) return {};

    // reduced system from the phase-1 tableau (already row-reduced, rank = start.m)
    int m = start.m, n = s.n;
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    std::vector<double> b(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) A[i][j] = start.t[i][j];
        b[i] = start.t[i][n];
    }

    // tableau for a basis, computed from scratch for numerical stability
    auto build = [&](uint64_t mask, Tableau& tb) {
        tb.m = m;
        tb.n = n;
        tb.t.assign(m + 1, std::vector<double>(n + 1, 0.0));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) tb.t[i][j] = A[i][j];
            tb.t[i][n] = b[i];
        }
        tb.basis.assign(m, -1);
        std::vector<char> used(m, 0);
        for (int j = 0; j < n; ++j) {
            if (!((mask >> j) & 1)) continue;
            int r = -1;
            double best = kPivotEps;
            for (int i = 0; i < m; ++i)
                if (!used[i] && std::fabs(tb.t[i][j]) > best) {
                    best = std::fabs(tb.t[i][j]);
                    r = i;
                }
            if (r < 0) return false;
            used[r] = 1;
            tb.pivot(r, j);
        }
        for (int i = 0; i < m; ++i)
            if (tb.t[i][n] < -1e-9) return false;
        return true;
    };

    uint64_t mask0 = 0;
    for (int c : start.basis) mask0 |= uint64_t{1} << c;

    std::vector<std::vector<double>> verts;
    std::set<std::vector<long long>> seen_v;
    std::unordered_set<uint64_t> seen{mask0};
    std::deque<uint64_t> q{mask0};
    Tableau tb;
    while (!q.empty()) {
        uint64_t mask = q.front();
        q.pop_front();
        if (!build(mask, tb)) continue;
        std::vector<double> x(n, 0.0);
        for (int i = 0; i < m; ++i) x[tb.basis[i]] = std::max(0.0, tb.t[i][n]);
        std::vector<long long> key(p.dim);
        for (int j = 0; j < p.dim; ++j) key[j] = std::llround(x[j] * 1e9);
        if (seen_v.insert(key).second) verts.emplace_back(x.begin(), x.begin() + p.dim);

        for (int j = 0; j < n; ++j) {
            if ((mask >> j) & 1) continue;
            double best = 0;
            bool any = false;
            for (int i = 0; i < m; ++i)
                if (tb.t[i][j] > kPivotEps) {
                    double r = tb.t[i][n] / tb.t[i][j];
                    if (!any || r < best) best = r;
                    any = true;
                }
            if (!any) continue;
            for (int i = 0; i < m; ++i) {
                if (tb.t[i][j] <= kPivotEps) continue;
                double r = tb.t[i][n] / tb.t[i][j];
                if (r > best + 1e-9) continue;
                uint64_t nm = (mask & ~(uint64_t{1} << tb.basis[i])) | (uint64_t{1} << j);
                if (seen.insert(nm).second) {
                    if (seen.size() > max_bases) throw CapExceeded("vertex enumeration visited too many bases");
                    q.push_back(nm);
                }
            }
        }
    }
    std::sort(verts.begin(), verts.end());
    return verts;
}

}  // namespace praline
