//! The fetch-robot domain used throughout the docs and tests.
//!
//! `move` may or may not require the torso crouched and the hand tucked;
//! `tuck` establishes both, `crouch` only the torso.

pub const FETCH_DOMAIN: &str = r#"(define (domain fetch)
(:requirements :strips :typing)
(:types location)
(:predicates (robot-at ?l - location) (is_crouch) (hand_tucked))
(:action tuck
:parameter              ()
:precondition           ()
:possible-precondition  ()
:effect                 (and    (is_crouch)
                                (hand_tucked))
:possible-effect        ()
)
(:action crouch
:parameter              ()
:precondition           ()
:possible-precondition  ()
:effect                 (and    (is_crouch))
:possible-effect        ()
)
(:action move
:parameter              (?from ?to - location)
:precondition           (robot-at ?from)
:possible-precondition  (and    (is_crouch)
                                (hand_tucked))
:effect                 (and    (robot-at ?to)
                                (not (robot-at
                                ?from)))
:possible-effect        ())
)
"#;

pub const FETCH_PROBLEM: &str = r#"(define (problem fetch-rooms)
(:domain fetch)
(:objects roomA roomB - location)
(:init (robot-at roomA))
(:goal (and (robot-at roomB))))
"#;

/// Like [`FETCH_DOMAIN`] but `tuck` only tucks the hand, so each flag has
/// exactly one achiever and the two template questions can be merged.
pub const FETCH_SPLIT_DOMAIN: &str = r#"(define (domain fetch)
(:requirements :strips :typing)
(:types location)
(:predicates (robot-at ?l - location) (is_crouch) (hand_tucked))
(:action tuck
:parameters ()
:precondition ()
:effect (hand_tucked))
(:action crouch
:parameters ()
:precondition ()
:effect (is_crouch))
(:action move
:parameters (?from ?to - location)
:precondition (robot-at ?from)
:possible-precondition (and (is_crouch) (hand_tucked))
:effect (and (robot-at ?to) (not (robot-at ?from)))
:possible-effect ())
)
"#;

/// [`FETCH_DOMAIN`] without the `tuck` action.
pub const FETCH_NO_TUCK_DOMAIN: &str = r#"(define (domain fetch)
(:requirements :strips :typing)
(:types location)
(:predicates (robot-at ?l - location) (is_crouch) (hand_tucked))
(:action crouch
:parameters ()
:precondition ()
:effect (is_crouch))
(:action move
:parameters (?from ?to - location)
:precondition (robot-at ?from)
:possible-precondition (and (is_crouch) (hand_tucked))
:effect (and (robot-at ?to) (not (robot-at ?from)))
:possible-effect ())
)
"#;
