//! Template-generated phishing and ham emails.
//!
//! Used to extend the small shipped fixture corpus so that demos and service
//! tests have enough data to train a usable model. Generation is fully
//! determined by the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmailRecord, Label};

const PHISH_SUBJECTS: &[&str] = &[
    "Urgent: verify your account now",
    "Job offer - work from home assistant",
    "Your mailbox is almost full",
    "Payment pending - action required",
    "Congratulations, you have been selected",
    "Final notice: account suspension",
    "Personal assistant opportunity",
    "Claim your reward today",
    "Security alert on your bank account",
    "Invoice overdue, confirm details",
];

const PHISH_OPENERS: &[&str] = &[
    "Dear Applicant,",
    "Dear Customer,",
    "Dear valued member,",
    "Dear user,",
    "Attention beneficiary,",
    "Hello friend,",
];

const PHISH_LINES: &[&str] = &[
    "Send your CV, phone number and a scan of your passport for verification.",
    "Fill out the attached form and scan it back to us today.",
    "Don't miss out on this amazing chance to earn a competitive salary.",
    "Click the link below to verify your password immediately.",
    "Your account will be suspended unless you confirm your bank details.",
    "This is a great work-from-home opportunity with flexible hours.",
    "Reply with your full name, address and phone number to claim the prize.",
    "We need a reliable assistant for errands and payments, apply now.",
    "Wire the processing fee and send a scan of your ID card.",
    "Act now, this limited offer expires in 24 hours.",
    "Update your billing information to avoid account closure.",
    "You have won a cash reward, provide your card number for transfer.",
    "Kindly send a copy of your passport and social security number.",
    "Login to the secure portal and enter your credentials to unlock access.",
];

const PHISH_CLOSERS: &[&str] = &[
    "Sincerely, Recruitment Team",
    "Regards, Account Security Department",
    "Best wishes, Claims Office",
    "Thank you, Customer Support",
];

const HAM_SUBJECTS: &[&str] = &[
    "Minutes from yesterday's meeting",
    "Draft of the project report",
    "Lunch on Thursday?",
    "Seminar schedule for next week",
    "Re: lecture notes",
    "Build failed on the main branch",
    "Quarterly budget review",
    "Reading group paper",
    "Lab equipment booking",
    "Re: thesis chapter comments",
];

const HAM_OPENERS: &[&str] = &["Hi team,", "Hello all,", "Hi Sam,", "Good morning,", "Hey,", "Dear colleagues,"];

const HAM_LINES: &[&str] = &[
    "The meeting has been moved to room 204 at 3pm.",
    "I attached the draft report, comments are welcome before Friday.",
    "The seminar on graph algorithms starts at 10am in the department library.",
    "Could you review the pull request when you have time?",
    "Lecture notes for week five are posted on the course page at cs.university.edu.",
    "The budget spreadsheet is updated with the new travel figures.",
    "Let's discuss the experiment results during the group meeting.",
    "The reading group will cover chapter three of the textbook.",
    "Please book the microscope through the lab calendar.",
    "I pushed a fix for the failing integration test.",
    "Thanks for the feedback on my thesis chapter, I revised section two.",
    "The conference deadline is next month, let's plan the submission.",
    "Professor Lee asked for the grading sheet by Monday.",
    "Forwarding the agenda from the faculty office at math.college.edu.",
];

const HAM_CLOSERS: &[&str] = &["Thanks, Alex", "Cheers, Jordan", "Best, Taylor", "See you then, Morgan"];

const PHISH_SENDERS: &[&str] = &[
    "support@secure-verify.com",
    "hr.recruit@jobs-online.net",
    "noreply@account-alert.info",
    "claims@prize-center.biz",
];

const HAM_SENDERS: &[&str] = &[
    "alex@cs.university.edu",
    "jordan@math.college.edu",
    "taylor@lab.institute.org",
    "morgan@dept.university.edu",
];

fn compose<R: Rng>(
    rng: &mut R,
    subjects: &[&str],
    senders: &[&str],
    openers: &[&str],
    lines: &[&str],
    closers: &[&str],
) -> (String, String) {
    let n_lines = rng.gen_range(2..=4);
    let chosen: Vec<&str> = lines.choose_multiple(rng, n_lines).copied().collect();
    let subject = subjects.choose(rng).copied().unwrap_or_default().to_string();
    let body = format!(
        "From: {}\n{}\n{}\n{}",
        senders.choose(rng).copied().unwrap_or_default(),
        openers.choose(rng).copied().unwrap_or_default(),
        chosen.join(" "),
        closers.choose(rng).copied().unwrap_or_default()
    );
    (subject, body)
}

/// Generates `n_phish` phishing and `n_ham` ham records, interleaved.
pub fn generate(n_phish: usize, n_ham: usize, seed: u64) -> Vec<EmailRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_phish + n_ham);
    let (mut p, mut h) = (0, 0);
    while p < n_phish || h < n_ham {
        if p < n_phish {
            let (s, b) = compose(&mut rng, PHISH_SUBJECTS, PHISH_SENDERS, PHISH_OPENERS, PHISH_LINES, PHISH_CLOSERS);
            out.push(EmailRecord::simple(Some(&s), &b, Label::Spam, "synthetic"));
            p += 1;
        }
        if h < n_ham {
            let (s, b) = compose(&mut rng, HAM_SUBJECTS, HAM_SENDERS, HAM_OPENERS, HAM_LINES, HAM_CLOSERS);
            out.push(EmailRecord::simple(Some(&s), &b, Label::Ham, "synthetic"));
            h += 1;
        }
    }
    out
}
