// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_MERKLE_HPP
#define MCOIN_MERKLE_HPP

#include <mcoin/bytes.hpp>

#include <vector>

namespace mcoin {

// Pairwise double SHA-256 tree; an odd node at any layer is paired with
// itself. Empty input is a caller error and throws.
Hash32 merkle_root(std::vector<Hash32> leaves);

} // namespace mcoin

#endif // MCOIN_MERKLE_HPP
