#pragma once

// Honeycomb lattice topology with typed links.
//
// Geometry convention (fixed once, all modules rely on it):
//   - Unit cells on an L1 x L2 grid, cell (x, y) with x in [0,L1), y in [0,L2).
//   - Each cell holds one odd-sublattice site A and one even-sublattice site B:
//       A(x,y) = 2*(y*L1 + x),  B(x,y) = A(x,y) + 1.
//   - Link types:  Y: A(x,y)-B(x,y)      (intra-cell)
//                  X: B(x,y)-A(x+1,y)    (next column)
//                  Z: B(x,y)-A(x,y+1)    (next row)
//   - Plaquette p(x,y) = y*L1 + x walks the hexagon
//       [B(x,y), A(x+1,y), B(x+1,y), A(x+1,y+1), B(x,y+1), A(x,y+1)]
//     and carries the Pauli labels [Y,Z,X,Y,Z,X] (each site is labelled by
//     the type of its bond pointing out of the hexagon).
//   - On a cylinder the x direction stays periodic and the Z links wrapping
//     the y direction are cut, so the plaquette row y = L2-1 is absent.

#include <array>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace floq {

enum class LinkType : int { X = 0, Y = 1, Z = 2 };
enum class Boundary { torus, cylinder };

inline char link_type_name(LinkType t) { return "XYZ"[static_cast<int>(t)]; }

struct Link {
    int i = -1;  // odd-sublattice endpoint
    int j = -1;  // even-sublattice endpoint
    LinkType type = LinkType::X;
    int cell_x = 0, cell_y = 0;      // defining cell, see header comment
    std::array<int, 2> plaq{-1, -1};  // adjacent plaquettes (-1 near a cut)
};

struct Plaquette {
    std::array<int, 6> sites{};
    std::array<LinkType, 6> labels{};
    std::array<int, 6> links{};  // boundary links in walk order
    int x = 0, y = 0;
};

class LatticeGraph {
public:
    int L1 = 0, L2 = 0;
    Boundary boundary = Boundary::torus;
    int n_sites = 0;
    std::vector<Link> links;
    std::vector<Plaquette> plaquettes;

    int site_a(int x, int y) const { return 2 * (wrap_y(y) * L1 + wrap_x(x)); }
    int site_b(int x, int y) const { return site_a(x, y) + 1; }
    bool is_odd(int site) const { return site % 2 == 0; }  // A sites are odd sublattice
    int cell_x(int site) const { return (site / 2) % L1; }
    int cell_y(int site) const { return (site / 2) / L1; }

    int wrap_x(int x) const { return ((x % L1) + L1) % L1; }
    int wrap_y(int y) const { return ((y % L2) + L2) % L2; }

    // link id incident to `site` of type `t`, or -1 when cut off
    int link_at(int site, LinkType t) const { return link_of_site_[site][static_cast<int>(t)]; }

    const std::vector<int>& links_of_type(LinkType t) const { return by_type_[static_cast<int>(t)]; }

    int plaquette_index(int x, int y) const {
        if (boundary == Boundary::cylinder && (y < 0 || y >= L2 - 1)) return -1;
        return wrap_y(y) * L1 + wrap_x(x);
    }
    int plaquette_rows() const { return boundary == Boundary::torus ? L2 : L2 - 1; }

    // dual-lattice step: neighbouring plaquette and the shared link.
    // dx,dy in {(+-1,0), (0,+-1), (-1,+1), (+1,-1)}.
    struct DualStep {
        int plaq = -1;
        int link = -1;
    };
    DualStep dual_step(int p, int dx, int dy) const {
        const Plaquette& pq = plaquettes.at(p);
        int nx = pq.x + dx, ny = pq.y + dy;
        DualStep s;
        s.plaq = plaquette_index(nx, ny);
        if (s.plaq < 0) return s;
        if (dx == 1 && dy == 0) s.link = cell_link(pq.x + 1, pq.y, LinkType::Z);
        else if (dx == -1 && dy == 0) s.link = cell_link(pq.x, pq.y, LinkType::Z);
        else if (dx == 0 && dy == 1) s.link = cell_link(pq.x, pq.y + 1, LinkType::X);
        else if (dx == 0 && dy == -1) s.link = cell_link(pq.x, pq.y, LinkType::X);
        else if (dx == 1 && dy == -1) s.link = cell_link(pq.x + 1, pq.y, LinkType::Y);
        else if (dx == -1 && dy == 1) s.link = cell_link(pq.x, pq.y + 1, LinkType::Y);
        else throw std::invalid_argument("dual_step: not a dual-lattice direction");
        if (s.link < 0) s.plaq = -1;
        return s;
    }

    // id of the link whose defining cell is (x,y)
    int cell_link(int x, int y, LinkType t) const {
        auto it = cell_link_.find(key(wrap_x(x), wrap_y(y), t));
        return it == cell_link_.end() ? -1 : it->second;
    }

    friend LatticeGraph build_lattice(int, int, Boundary);

private:
    std::vector<std::array<int, 3>> link_of_site_;
    std::array<std::vector<int>, 3> by_type_;
    std::unordered_map<long, int> cell_link_;
    long key(int x, int y, LinkType t) const {
        return (static_cast<long>(y) * L1 + x) * 3 + static_cast<int>(t);
    }
};

inline LatticeGraph build_lattice(int L1, int L2, Boundary boundary = Boundary::torus) {
    if (L1 < 2 || L2 < 2)
        throw std::invalid_argument("build_lattice: need L1 >= 2 and L2 >= 2");
    LatticeGraph g;
    g.L1 = L1;
    g.L2 = L2;
    g.boundary = boundary;
    g.n_sites = 2 * L1 * L2;
    g.link_of_site_.assign(g.n_sites, {-1, -1, -1});

    auto add_link = [&](int i, int j, LinkType t, int cx, int cy) {
        Link l;
        l.i = i;
        l.j = j;
        l.type = t;
        l.cell_x = cx;
        l.cell_y = cy;
        int id = static_cast<int>(g.links.size());
        g.links.push_back(l);
        g.link_of_site_[i][static_cast<int>(t)] = id;
        g.link_of_site_[j][static_cast<int>(t)] = id;
        g.by_type_[static_cast<int>(t)].push_back(id);
        g.cell_link_[g.key(cx, cy, t)] = id;
    };

    for (int y = 0; y < L2; ++y) {
        for (int x = 0; x < L1; ++x) {
            add_link(g.site_a(x, y), g.site_b(x, y), LinkType::Y, x, y);
            add_link(g.site_a(x + 1, y), g.site_b(x, y), LinkType::X, x, y);
            if (boundary == Boundary::torus || y + 1 < L2)
                add_link(g.site_a(x, y + 1), g.site_b(x, y), LinkType::Z, x, y);
        }
    }

    int rows = g.plaquette_rows();
    for (int y = 0; y < rows; ++y) {
        for (int x = 0; x < L1; ++x) {
            Plaquette p;
            p.x = x;
            p.y = y;
            p.sites = {g.site_b(x, y),     g.site_a(x + 1, y),     g.site_b(x + 1, y),
                       g.site_a(x + 1, y + 1), g.site_b(x, y + 1), g.site_a(x, y + 1)};
            p.labels = {LinkType::Y, LinkType::Z, LinkType::X,
                        LinkType::Y, LinkType::Z, LinkType::X};
            p.links = {g.cell_link(x, y, LinkType::X),     g.cell_link(x + 1, y, LinkType::Y),
                       g.cell_link(x + 1, y, LinkType::Z), g.cell_link(x, y + 1, LinkType::X),
                       g.cell_link(x, y + 1, LinkType::Y), g.cell_link(x, y, LinkType::Z)};
            for (int l : p.links)
                if (l < 0) throw std::logic_error("build_lattice: hexagon references a cut link");
            g.plaquettes.push_back(p);
        }
    }
    for (int pid = 0; pid < static_cast<int>(g.plaquettes.size()); ++pid) {
        for (int l : g.plaquettes[pid].links) {
            Link& lk = g.links[l];
            if (lk.plaq[0] < 0) lk.plaq[0] = pid;
            else lk.plaq[1] = pid;
        }
    }
    return g;
}

// ordered (site, Pauli-label) pairs of the hexagon p
inline std::vector<std::pair<int, LinkType>> plaquette_operator(const LatticeGraph& g, int p) {
    if (p < 0 || p >= static_cast<int>(g.plaquettes.size()))
        throw std::out_of_range("plaquette_operator: invalid plaquette index");
    std::vector<std::pair<int, LinkType>> out;
    for (int k = 0; k < 6; ++k)
        out.emplace_back(g.plaquettes[p].sites[k], g.plaquettes[p].labels[k]);
    return out;
}

inline nlohmann::json lattice_to_json(const LatticeGraph& g) {
    nlohmann::json j;
    j["L1"] = g.L1;
    j["L2"] = g.L2;
    j["boundary"] = g.boundary == Boundary::torus ? "torus" : "cylinder";
    j["n_sites"] = g.n_sites;
    auto sites = nlohmann::json::array();
    for (int s = 0; s < g.n_sites; ++s)
        sites.push_back({{"id", s},
                         {"sublattice", g.is_odd(s) ? "odd" : "even"},
                         {"cell", {g.cell_x(s), g.cell_y(s)}}});
    j["sites"] = sites;
    auto links = nlohmann::json::array();
    for (const auto& l : g.links)
        links.push_back({{"i", l.i}, {"j", l.j}, {"type", std::string(1, link_type_name(l.type))}});
    j["links"] = links;
    auto plaqs = nlohmann::json::array();
    for (const auto& p : g.plaquettes) {
        nlohmann::json jp;
        jp["cell"] = {p.x, p.y};
        jp["sites"] = p.sites;
        std::string labels;
        for (auto t : p.labels) labels += link_type_name(t);
        jp["labels"] = labels;
        plaqs.push_back(jp);
    }
    j["plaquettes"] = plaqs;
    return j;
}

}  // namespace floq
