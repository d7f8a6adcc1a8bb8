#ifndef KHINCHIN_KHINCHIN_HPP
#define KHINCHIN_KHINCHIN_HPP

#include "bell.hpp"
#include "criteria.hpp"
#include "error.hpp"
#include "euler_product.hpp"
#include "exact.hpp"
#include "family.hpp"
#include "fulcrum.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "series.hpp"
#include "special.hpp"
#include "xreal.hpp"

#endif  // KHINCHIN_KHINCHIN_HPP
