#pragma once

#include <cstddef>
#include <vector>

namespace qsn {

struct Gate {
    enum class Kind { cnot, x };
    Kind kind = Kind::x;
    std::size_t control = 0;  // meaningful for cnot only
    std::size_t target = 0;
};

inline Gate make_x(std::size_t target) { return {Gate::Kind::x, 0, target}; }
inline Gate make_cnot(std::size_t control, std::size_t target) {
    return {Gate::Kind::cnot, control, target};
}

// Compiled circuit for a schedule: the preparation block, one block per
// family transition, and the final disentangling block. All entangling gates
// are CNOTs controlled on the anchor qubit.
struct GateSequence {
    std::size_t qubits = 0;
    std::size_t anchor = 0;
    std::vector<Gate> prep;
    std::vector<std::vector<Gate>> transitions;
    std::vector<Gate> measurement;

    static int cnot_count(const std::vector<Gate>& block) {
        int n = 0;
        for (const Gate& g : block) n += (g.kind == Gate::Kind::cnot);
        return n;
    }
};

}  // namespace qsn
