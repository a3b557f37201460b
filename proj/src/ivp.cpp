#include "plab/allocation.hpp"

#include "plab/error.hpp"

#include <string>

namespace plab
{
    Weights ivp_weights(const Eigen::VectorXd &volatilities)
    {
        if (volatilities.size() == 0)
            throw DimensionError("IVP needs at least one asset");
        for (Index i = 0; i < volatilities.size(); ++i)
            if (!(volatilities(i) > kVarianceFloor))
                throw DegenerateError("IVP volatility at or below the floor", "#" + std::to_string(i));

        Weights w;
        w.scheme = SchemeKind::ivp;
        w.values = volatilities.cwiseInverse();
        w.values /= w.values.sum();
        return w;
    }
}
