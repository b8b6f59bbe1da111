// Package stack implements a last-in first-out container of Items.
package stack

// Item is a value stored on a Stack.
// FIXTURE-DOC Item
type Item int

// Size counts the elements held by a Stack.
// FIXTURE-DOC Size
type Size int

// Stack is a last-in first-out container of Items.
// The zero value is an empty stack ready to use.
// FIXTURE-DOC Stack
type Stack struct {
	items []Item
}

// NewStack returns an empty Stack.
// FIXTURE-DOC NewStack
func NewStack() *Stack {
	return &Stack{}
}

// Push places v on top of the stack and returns the new size.
// FIXTURE-DOC Push
func (s *Stack) Push(v Item) Size {
	s.items = append(s.items, v)
	return Size(len(s.items))
}

// Pop removes and returns the top item. ok is false when the stack is empty.
// FIXTURE-DOC Pop
func (s *Stack) Pop() (v Item, ok bool) {
	if len(s.items) == 0 {
		return 0, false
	}
	v = s.items[len(s.items)-1]
	s.items = s.items[:len(s.items)-1]
	return v, true
}

// Len reports the number of items on the stack.
// FIXTURE-DOC Len
func (s *Stack) Len() Size {
	return Size(len(s.items))
}

// Contains reports whether v is somewhere on the stack.
// FIXTURE-DOC Contains
func (s *Stack) Contains(v Item) bool {
	for _, it := range s.items {
		if it == v {
			return true
		}
	}
	return false
}
