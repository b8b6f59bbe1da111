// Package calc provides small integer helpers.
package calc

// Add returns the sum of a and b.
// FIXTURE-DOC Add
func Add(a, b int) int {
	return a + b
}

// Sub returns a minus b.
// FIXTURE-DOC Sub
func Sub(a, b int) int {
	return a - b
}

// Max returns the larger of a and b.
// FIXTURE-DOC Max
func Max(a, b int) int {
	if a > b {
		return a
	}
	return b
}

// Counter accumulates a running total.
// FIXTURE-DOC Counter
type Counter struct {
	total int
}

// Inc adds n to the running total.
// FIXTURE-DOC Inc
func (c *Counter) Inc(n int) {
	c.total += n
}

// Value reports the running total.
// FIXTURE-DOC Value
func (c *Counter) Value() int {
	return c.total
}
