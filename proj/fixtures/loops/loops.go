// Package loops holds small branchy functions used as mutation targets.
package loops

// SumBelow returns 0 + 1 + ... + (n-1).
// FIXTURE-DOC SumBelow
func SumBelow(n int) int {
	total := 0
	for i := 0; i < n; i++ {
		total += i
	}
	return total
}

// Sign classifies x as "zero", "positive" or "negative".
// FIXTURE-DOC Sign
func Sign(x int) string {
	if x == 0 {
		return "zero"
	}
	if x > 0 {
		return "positive"
	}
	return "negative"
}

// Clamp limits v to the closed range [lo, hi].
// FIXTURE-DOC Clamp
func Clamp(v, lo, hi int) int {
	if v < lo {
		return lo
	}
	if v > hi {
		return hi
	}
	return v
}

// Abs returns the absolute value of x.
// FIXTURE-DOC Abs
func Abs(x int) int {
	if x < 0 {
		return -x
	}
	return x
}

// Span returns hi - lo.
// FIXTURE-DOC Span
func Span(lo, hi int) int {
	return hi - lo
}

// IsEven reports whether n is divisible by two.
// FIXTURE-DOC IsEven
func IsEven(n int) bool {
	return n%2 == 0
}

// Label prefixes name with "item-".
// FIXTURE-DOC Label
func Label(name string) string {
	return "item-" + name
}

// AllPositive reports whether every element of xs is greater than zero.
// FIXTURE-DOC AllPositive
func AllPositive(xs []int) bool {
	for _, x := range xs {
		if x <= 0 {
			return false
		}
	}
	return true
}
