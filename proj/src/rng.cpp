#include "fdaloha/rng.hpp"

#include <boost/random/exponential_distribution.hpp>

namespace fdaloha {

std::uint64_t StreamKey::digest() const
{
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ replication);
    h = mix64(h + slot * 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ static_cast<std::uint64_t>(tag));
    h = mix64(h + index);
    return h;
}

double CounterRng::exponential()
{
    boost::random::exponential_distribution<double> dist;
    return dist(*this);
}

} // namespace fdaloha
