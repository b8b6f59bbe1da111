package stack

import "testing"

func TestPopEmpty(t *testing.T) {
	var s Stack
	if _, ok := s.Pop(); ok {
		t.Fatal("Pop on an empty stack reported ok")
	}
}

func TestPopFull(t *testing.T) {
	var s Stack
	s.Push(1)
	if v, ok := s.Pop(); !ok || v != 1 {
		t.Fatalf("Pop() = %d, %v", v, ok)
	}
}

func TestLen(t *testing.T) {
	var s Stack
	if s.Len() != 0 {
		t.Fatalf("Len() = %d", s.Len())
	}
}
