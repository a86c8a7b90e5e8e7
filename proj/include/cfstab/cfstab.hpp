#ifndef CFSTAB_CFSTAB_HPP
#define CFSTAB_CFSTAB_HPP

#include "cfstab/bounds.hpp"
#include "cfstab/bss.hpp"
#include "cfstab/charfn.hpp"
#include "cfstab/dependence.hpp"
#include "cfstab/entropy.hpp"
#include "cfstab/error.hpp"
#include "cfstab/kdtree.hpp"
#include "cfstab/linalg.hpp"
#include "cfstab/models.hpp"
#include "cfstab/rng.hpp"
#include "cfstab/sources.hpp"
#include "cfstab/stats.hpp"

#endif  // CFSTAB_CFSTAB_HPP
